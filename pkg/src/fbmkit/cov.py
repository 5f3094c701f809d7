"""Closed-form covariance of fractional Brownian motion and fractional Gaussian noise."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np


@dataclass(frozen=True)
class HurstParameter:
    """Hurst index, strictly inside (0, 1)."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not (0.0 < v < 1.0) or not np.isfinite(v):
            raise ValueError(f"Hurst parameter must lie in (0, 1), got {self.value!r}")
        object.__setattr__(self, "value", v)

    def __float__(self) -> float:
        return self.value


HurstLike = Union[HurstParameter, float]


def as_hurst(H: HurstLike) -> HurstParameter:
    return H if isinstance(H, HurstParameter) else HurstParameter(H)


def _check_times(*times):
    for t in times:
        if np.any(np.asarray(t) < 0):
            raise ValueError("time arguments must be nonnegative")


def fbm_covariance(H: HurstLike, t, s):
    """E[B_t B_s] = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2.

    Broadcasts over array arguments.
    """
    h2 = 2.0 * as_hurst(H).value
    _check_times(t, s)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    out = 0.5 * (t**h2 + s**h2 - np.abs(t - s) ** h2)
    return out[()] if out.ndim == 0 else out


def increment_covariance(H: HurstLike, s1, t1, s2, t2):
    """E[(B_{t1} - B_{s1})(B_{t2} - B_{s2})]."""
    h2 = 2.0 * as_hurst(H).value
    _check_times(s1, t1, s2, t2)
    s1, t1, s2, t2 = (np.asarray(x, dtype=float) for x in (s1, t1, s2, t2))
    out = 0.5 * (
        np.abs(t1 - s2) ** h2
        + np.abs(t2 - s1) ** h2
        - np.abs(t2 - t1) ** h2
        - np.abs(s2 - s1) ** h2
    )
    return out[()] if out.ndim == 0 else out


def variogram(H: HurstLike, t, s):
    """E[(B_t - B_s)^2] = |t - s|^{2H}."""
    h2 = 2.0 * as_hurst(H).value
    _check_times(t, s)
    out = np.abs(np.asarray(t, dtype=float) - np.asarray(s, dtype=float)) ** h2
    return out[()] if out.ndim == 0 else out


def fgn_autocovariance(H: HurstLike, n):
    """Autocovariance of unit-grid fractional Gaussian noise at integer lag ``n >= 0``.

    rho(0) = 1 and rho(n) = ((n+1)^{2H} + (n-1)^{2H} - 2 n^{2H}) / 2 otherwise.
    The second difference is evaluated as written; at large lags it loses
    relative precision like any cancelling difference.
    """
    h2 = 2.0 * as_hurst(H).value
    n = np.asarray(n)
    if np.any(n < 0):
        raise ValueError("lag must be nonnegative")
    k = n.astype(float)
    out = 0.5 * ((k + 1) ** h2 + np.abs(k - 1) ** h2 - 2.0 * k**h2)
    out = np.where(n == 0, 1.0, out)
    return out[()] if out.ndim == 0 else out


def fgn_covariance_matrix(H: HurstLike, N: int) -> np.ndarray:
    """Dense N x N Toeplitz covariance of N consecutive fGn values."""
    from scipy.linalg import toeplitz

    return toeplitz(fgn_autocovariance(H, np.arange(N)))
