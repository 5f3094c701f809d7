"""Variation filters: polynomials with a root of multiplicity r at x = 1.

A filter ``a(x) = sum_k a_k x^k`` is stored by its ascending coefficient
vector. Applied to observations it annihilates polynomial trends of degree
below its order and speeds up the decay of the filtered autocovariance.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .cov import HurstLike, as_hurst

ORDER_TOL = 1e-9


def _taylor_at_one(coeffs) -> np.ndarray:
    """Derivatives a^{(j)}(1), j = 0..q."""
    a = np.asarray(coeffs, dtype=float)
    q = a.size - 1
    out = np.empty(q + 1)
    for j in range(q + 1):
        out[j] = factorial(j) * sum(comb(k, j) * a[k] for k in range(j, q + 1))
    return out


def validate_order(coeffs) -> int:
    """Multiplicity of the root x = 1 of the polynomial with these coefficients.

    Derivatives at 1 are compared against ``ORDER_TOL`` in absolute value.
    """
    a = np.asarray(coeffs, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("filter coefficients must be a nonempty 1-d vector")
    derivs = _taylor_at_one(a)
    if abs(derivs[0]) > ORDER_TOL:
        raise ValueError("order zero: not a valid variation filter")
    nonzero = np.flatnonzero(np.abs(derivs) > ORDER_TOL)
    if nonzero.size == 0:
        raise ValueError("zero polynomial is not a valid variation filter")
    return int(nonzero[0])


@dataclass(frozen=True)
class Filter:
    coeffs: tuple
    order: int
    name: str = ""

    def __post_init__(self):
        c = tuple(float(x) for x in self.coeffs)
        if len(c) < 2:
            raise ValueError("filter needs degree q >= 1")
        if c[-1] == 0.0:
            raise ValueError("leading coefficient a_q must be nonzero")
        r = validate_order(c)
        if r != self.order:
            raise ValueError(f"declared order {self.order} but coefficients have order {r}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_coeffs(cls, coeffs, name: str = "") -> "Filter":
        return cls(tuple(coeffs), validate_order(coeffs), name)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs)


def _daubechies4() -> tuple:
    # 1/4 (x - 1)(x^2 (1 - sqrt 3) - 2x), expanded
    s3 = np.sqrt(3.0)
    return (0.0, 0.5, (s3 - 3.0) / 4.0, (1.0 - s3) / 4.0)


NAMED_FILTERS = {
    "increments1": (-1.0, 1.0),
    "daubechies4": _daubechies4(),
    "increments2": (1.0, -2.0, 1.0),
}


def make_named_filter(name: str) -> Filter:
    try:
        coeffs = NAMED_FILTERS[name]
    except KeyError:
        raise ValueError(f"unknown filter {name!r}; choose from {sorted(NAMED_FILTERS)}") from None
    return Filter.from_coeffs(coeffs, name)


def dilate(f: Filter, m: int) -> Filter:
    """The filter a(x^m): taps spread out by a factor m, order unchanged."""
    if int(m) != m or m < 1:
        raise ValueError(f"dilation must be a positive integer, got {m!r}")
    m = int(m)
    if m == 1:
        return f
    c = np.zeros(f.degree * m + 1)
    c[::m] = f.coeffs
    name = f"{f.name}^{m}" if f.name else ""
    return Filter(tuple(c), f.order, name)


def apply_filter(series, f: Filter) -> np.ndarray:
    """Filtered observations ``sum_k a_k x_{n+k}`` along the last axis.

    An input of length N gives N - q outputs. 2-d input is filtered row by row.
    """
    x = np.asarray(series, dtype=float)
    q = f.degree
    n = x.shape[-1]
    if n <= q:
        raise ValueError("series shorter than filter")
    length = n - q
    out = np.zeros(x.shape[:-1] + (length,))
    for k, a_k in enumerate(f.coeffs):
        if a_k != 0.0:
            out += a_k * x[..., k : k + length]
    return out


def _tap_autocorrelation(a: np.ndarray):
    """Offsets d and weights w_d = sum_{k - j = d} a_k a_j."""
    w = np.correlate(a, a, mode="full")
    d = np.arange(-(a.size - 1), a.size)
    return d, w


def filtered_autocovariance(H: HurstLike, f: Filter, lag):
    """Theoretical autocovariance of fBm filtered by ``f`` on the unit grid.

    rho(lag) = -1/2 sum_{k,j} a_k a_j |lag + k - j|^{2H}; even in ``lag``.

    Far from the origin the double sum is a 2r-fold finite difference of
    x^{2H} and cancels catastrophically, so lags beyond ``4q`` are summed
    through the binomial expansion of (lag + d)^{2H} instead, starting at
    the first non-vanishing moment of the tap weights.
    """
    from scipy.special import binom

    h2 = 2.0 * as_hurst(H).value
    d, w = _tap_autocorrelation(f.array)
    lag_arr = np.abs(np.asarray(lag, dtype=float))
    out = np.empty(lag_arr.shape)
    flat_lag = lag_arr.reshape(-1)
    flat_out = out.reshape(-1)
    far = flat_lag > 4 * f.degree
    near_lags = flat_lag[~far]
    flat_out[~far] = -0.5 * (np.abs(near_lags[:, None] + d[None, :]) ** h2) @ w
    if np.any(far):
        L = flat_lag[far]
        df = d.astype(float)
        total = np.zeros_like(L)
        ratio_pow = (1.0 / L) ** (2 * f.order)
        p = 2 * f.order
        while True:
            c = binom(h2, p) * ratio_pow
            total += c * float(np.sum(w * df**p))
            # |d/L| <= 1/4, so the remaining tail is geometrically small
            bound = np.abs(c) * float(np.sum(np.abs(w) * np.abs(df) ** p))
            if np.all(bound <= 1e-17 * np.abs(total)) or p > 400:
                break
            p += 1
            ratio_pow = ratio_pow / L
        flat_out[far] = -0.5 * L**h2 * total
    return out[()] if out.ndim == 0 else out
