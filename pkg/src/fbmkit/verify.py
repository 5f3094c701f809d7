"""Self-checks run by ``fbmkit verify``: deterministic identities plus scaled-down Monte Carlo.

Monte Carlo tolerances are a fixed number of standard errors at the requested
replication count, so ``--mc-reps 100`` is cheap but loose.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import circulant, cov, filters, hurst, kernels

GROUPS = ("cov", "filters", "circulant", "kernels", "hurst")


@dataclass
class Context:
    mc_reps: int = 2000
    seed: int = 0
    workers: int = 1


@dataclass
class CheckResult:
    group: str
    name: str
    passed: bool
    detail: str


_CHECKS: list = []


def check(group: str, name: str):
    def deco(fn: Callable[[Context], tuple]):
        _CHECKS.append((group, name, fn))
        return fn

    return deco


H_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@check("cov", "covariance symmetry, scaling and shift invariance")
def _cov_identities(ctx):
    t = np.linspace(0, 3, 7)
    T, S = np.meshgrid(t, t)
    worst = 0.0
    for H in H_GRID:
        c = cov.fbm_covariance(H, T, S)
        worst = max(worst, np.abs(c - c.T).max())
        for a in (0.5, 2.0, 7.0):
            worst = max(worst, np.abs(cov.fbm_covariance(H, a * T, a * S) - a ** (2 * H) * c).max())
        base = cov.increment_covariance(H, 0.0, 1.0, 2.0, 3.5)
        worst = max(worst, abs(cov.increment_covariance(H, 1.5, 2.5, 3.5, 5.0) - base))
    return worst < 1e-11, f"max deviation {worst:.2e}"


@check("cov", "fGn autocovariance sign follows H - 1/2")
def _fgn_sign(ctx):
    n = np.arange(1, 200)
    ok = all(
        np.all(np.sign(cov.fgn_autocovariance(H, n)) == np.sign(H - 0.5)) for H in H_GRID
    )
    return ok, "lags 1..199"


@check("filters", "named filter orders")
def _named_orders(ctx):
    got = {name: filters.make_named_filter(name).order for name in filters.NAMED_FILTERS}
    return got == {"increments1": 1, "daubechies4": 1, "increments2": 2}, str(got)


@check("filters", "dilated zero-lag variance scales as m^{2H}")
def _dilation(ctx):
    worst = 0.0
    for name in filters.NAMED_FILTERS:
        f = filters.make_named_filter(name)
        for H in H_GRID:
            base = filters.filtered_autocovariance(H, f, 0)
            for m in range(1, 9):
                got = filters.filtered_autocovariance(H, filters.dilate(f, m), 0)
                worst = max(worst, abs(got / (m ** (2 * H) * base) - 1))
    return worst < 1e-10, f"max relative deviation {worst:.2e}"


@check("circulant", "embedding eigenvalues nonnegative and FFT round trip exact")
def _embedding(ctx):
    N = 2**10 + 1
    worst, min_lam = 0.0, np.inf
    for H in H_GRID:
        e = circulant.build_embedding(H, N)
        c = circulant.embedding_first_row(H, N)
        back = np.fft.ifft(e.lam).real
        worst = max(worst, np.abs(back - c).max(), np.abs(back[:N] - cov.fgn_autocovariance(H, np.arange(N))).max())
        min_lam = min(min_lam, e.lam.min())
    return worst <= 1e-10 and min_lam >= 0, f"round trip {worst:.2e}, min eigenvalue {min_lam:.3g}"


@check("circulant", "sample covariance matches Toeplitz(rho)")
def _sample_cov(ctx):
    n = ctx.mc_reps
    tol = 5 * np.sqrt(2.0 / n)
    worst = 0.0
    for i, H in enumerate((0.3, 0.5, 0.7)):
        x = circulant.sample_fgn(circulant.build_embedding(H, 32), [ctx.seed, i], n, ctx.workers).values
        worst = max(worst, np.abs(x.T @ x / n - cov.fgn_covariance_matrix(H, 32)).max())
    return worst <= tol, f"max entry error {worst:.4f} (tol {tol:.4f})"


@check("circulant", "terminal variance of B_T equals T^{2H}")
def _terminal(ctx):
    n = ctx.mc_reps
    path = circulant.simulate_fbm(0.7, 2**10 + 1, 2.0, [ctx.seed, 10], n, ctx.workers)
    v = np.mean(path.values[:, -1] ** 2)
    target = 2.0**1.4
    tol = 4 * np.sqrt(2.0 / n) * target
    return abs(v - target) <= tol, f"{v:.4f} vs {target:.4f} (tol {tol:.4f})"


@check("kernels", "normalising constants")
def _constants(ctx):
    worst = 0.0
    for H in (0.3, 0.6, 0.8):
        ma = kernels.ma_constant(H)
        I = kernels.ha_integral(H)
        worst = max(worst, abs(ma.integral - ma.closed), abs(I.integral - I.closed) / 100)
    ok = worst <= 1e-6 and abs(kernels.ha_constant(0.5).integral - np.pi**-0.5) <= 1e-6
    return ok, f"max deviation {worst:.2e}"


@check("kernels", "kernel inner products reproduce the covariance")
def _inner(ctx):
    worst = 0.0
    times = (0.5, 1.0, 2.0)
    for kind in kernels.KernelKind:
        for H in (0.3, 0.6, 0.8):
            for t in times:
                for s in times:
                    got = kernels.kernel_inner_product(kind, H, t, s)
                    worst = max(worst, abs(got - cov.fbm_covariance(H, t, s)))
    return worst <= 1e-2, f"max error {worst:.2e}"


@check("kernels", "Volterra Beta identity")
def _beta(ctx):
    worst = 0.0
    for H, u, v in ((0.75, 1, 2), (0.6, 0.5, 3), (0.9, 1, 1.5)):
        a, b = kernels.volterra_beta_identity_check(H, u, v)
        worst = max(worst, abs(a - b) / abs(b))
    return worst <= 1e-6, f"max relative deviation {worst:.2e}"


@check("hurst", "estimator is exactly scale invariant")
def _scale(ctx):
    rng = np.random.default_rng(ctx.seed)
    cfg = hurst.EstimatorConfig.named()
    worst = 0.0
    for _ in range(20):
        x = np.cumsum(rng.standard_normal(500))
        h = hurst.estimate_hurst(x, cfg).h_hat
        for c in (1e-6, 1e6):
            worst = max(worst, abs(hurst.estimate_hurst(c * x, cfg).h_hat - h))
    return worst <= 1e-12, f"max deviation {worst:.2e}"


@check("hurst", "estimator error shrinks with N")
def _consistency(ctx):
    reps = max(20, ctx.mc_reps // 10)
    cfg = hurst.EstimatorConfig.named()
    lines, ok = [], True
    for i, H in enumerate((0.3, 0.5, 0.7)):
        errs = []
        for n in (2**10 + 1, 2**12 + 1):
            paths = hurst.simulate_observations(H, n, [ctx.seed, 20 + i, n], reps, ctx.workers)
            errs.append(np.mean(np.abs(hurst.estimate_many(paths, cfg) - H)))
        ok &= errs[1] < errs[0]
        lines.append(f"H={H}: {errs[0]:.4f} -> {errs[1]:.4f}")
    return bool(ok), "; ".join(lines)


@check("hurst", "asymptotic normality of filtered variance")
def _normality(ctx):
    reps = ctx.mc_reps
    a = hurst.normality_diagnostic(
        0.6, filters.make_named_filter("increments1"), 1, 2**12, reps, [ctx.seed, 30], workers=ctx.workers
    )
    b = hurst.normality_diagnostic(
        0.8, filters.make_named_filter("increments2"), 1, 2**12, reps, [ctx.seed, 31], workers=ctx.workers
    )
    flagged = not hurst.normality_hypothesis_holds(0.85, 1)
    return a.passed and b.passed and flagged, f"p = {a.p_value:.3f}, {b.p_value:.3f}"


def _input_check(path, ctx):
    """White-noise style check: increments of stored paths have fGn autocovariance."""
    from .io import read_sidecar, read_series

    meta = read_sidecar(path)
    if "H" not in meta:
        return CheckResult("input", str(path), False, "sidecar with H required")
    H = meta["H"]
    cols = np.array(list(read_series(path).values()))
    inc = cols if meta.get("noise") else np.diff(cols, axis=-1)
    inc = inc / np.sqrt(np.mean(inc * inc))
    n = inc.size
    worst = 0.0
    for lag in range(1, 6):
        emp = np.mean(inc[:, lag:] * inc[:, :-lag])
        worst = max(worst, abs(emp - cov.fgn_autocovariance(H, lag)))
    # Bartlett-type standard error, summed over the whole path length
    rho = cov.fgn_autocovariance(H, np.arange(inc.shape[-1]))
    tol = 4 * np.sqrt(2 * np.sum(rho**2) / n)
    return CheckResult("input", f"increment autocovariance of {path}", worst <= tol, f"max lag error {worst:.4f} (tol {tol:.4f})")


def run_checks(only=None, ctx: Context = None, inputs=()) -> list:
    ctx = ctx or Context()
    results = []
    for group, name, fn in _CHECKS:
        if only and group not in only:
            continue
        try:
            passed, detail = fn(ctx)
        except Exception as exc:  # a crashing check is a failed check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(group, name, bool(passed), detail))
    for path in inputs:
        results.append(_input_check(path, ctx))
    return results
