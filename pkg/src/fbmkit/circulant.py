"""Exact fGn / fBm simulation by circulant embedding (Wood-Chan) with a Cholesky oracle.

DFT conventions, fixed: forward ``X_k = sum_j x_j exp(-2 pi i jk/M)`` and
inverse ``x_j = (1/M) sum_k X_k exp(+2 pi i jk/M)``, i.e. numpy's ``fft``
and ``ifft``.

Draw order: path ``i`` of a batch consumes exactly ``M`` standard normals
(``N`` for the Cholesky oracle) from child stream ``i`` of the seed; see
:mod:`fbmkit.rng`.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .cov import HurstLike, HurstParameter, as_hurst, fgn_autocovariance, fgn_covariance_matrix
from .rng import SeedLike, chunk_slices, path_generators

log = logging.getLogger(__name__)

NEGATIVE_EIG_TOL = 1e-10
IMAG_TOL = 1e-8
CHOLESKY_MAX_N = 2048
# fixed batch size so results are bit-identical for any worker count
_CHUNK = 64


@dataclass(frozen=True, eq=False)
class CirculantEmbedding:
    """Eigenvalues of the 2(N-1) x 2(N-1) circulant matrix that embeds the fGn covariance."""

    H: HurstParameter
    N: int
    lam: np.ndarray = field(repr=False)

    @property
    def M(self) -> int:
        return 2 * (self.N - 1)

    @property
    def sqrt_lam(self) -> np.ndarray:
        return np.sqrt(self.lam)


@dataclass(frozen=True, eq=False)
class FgnSeries:
    """Unit-variance fGn samples; ``values`` has shape ``(N,)`` or ``(count, N)``."""

    values: np.ndarray
    H: HurstParameter
    spacing: float = 1.0

    def __post_init__(self):
        if np.shape(self.values)[-1] < 1:
            raise ValueError("empty series")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")

    @property
    def N(self) -> int:
        return self.values.shape[-1]

    def __len__(self):
        return self.values.shape[0] if self.values.ndim > 1 else 1

    def __getitem__(self, i) -> "FgnSeries":
        return FgnSeries(np.atleast_2d(self.values)[i], self.H, self.spacing)


@dataclass(frozen=True, eq=False)
class FbmPath:
    """fBm sampled at ``times = 0, D, ..., N D``; ``values[..., 0] == 0``."""

    times: np.ndarray
    values: np.ndarray
    H: HurstParameter

    @property
    def spacing(self) -> float:
        return float(self.times[1] - self.times[0])

    def __len__(self):
        return self.values.shape[0] if self.values.ndim > 1 else 1


def is_power_of_two_plus_one(N: int) -> bool:
    return N >= 2 and ((N - 1) & (N - 2)) == 0


def embedding_first_row(H: HurstLike, N: int) -> np.ndarray:
    """c_0 = 1, c_k = rho(k) for k < N and c_k = rho(M - k) for k >= N."""
    if int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N!r}")
    N = int(N)
    M = 2 * (N - 1)
    k = np.arange(M)
    return fgn_autocovariance(H, np.where(k < N, k, M - k))


def build_embedding(H: HurstLike, N: int) -> CirculantEmbedding:
    """Circulant eigenvalues for sampling N consecutive fGn values."""
    H = as_hurst(H)
    c = embedding_first_row(H, N)
    spectrum = np.fft.fft(c)
    scale = np.max(np.abs(spectrum))
    imag = np.max(np.abs(spectrum.imag))
    if imag > IMAG_TOL * scale:
        raise ArithmeticError(f"circulant spectrum not real: max |imag| = {imag:.3g}")
    lam = spectrum.real.copy()
    floor = -NEGATIVE_EIG_TOL * lam.max()
    if lam.min() < floor:
        raise ArithmeticError(
            f"embedding not nonnegative definite: min eigenvalue {lam.min():.3g}"
        )
    lam[lam < 0] = 0.0
    lam.flags.writeable = False
    return CirculantEmbedding(H, int(N), lam)


def circulant_transform(e: CirculantEmbedding, zeta: np.ndarray) -> np.ndarray:
    """Complex product ``S zeta`` with S = Q Lambda^{1/2} Q*, along the last axis.

    ``zeta`` has trailing length M. The result is real up to rounding; callers
    take the real part of its first N entries.
    """
    return np.fft.fft(np.fft.ifft(zeta, axis=-1) * e.sqrt_lam, axis=-1)


def _fgn_chunk(e: CirculantEmbedding, gens: list) -> np.ndarray:
    zeta = np.stack([g.standard_normal(e.M) for g in gens])
    xi = circulant_transform(e, zeta)[:, : e.N]
    scale = np.max(np.abs(xi.real))
    imag = np.max(np.abs(xi.imag))
    if imag > IMAG_TOL * max(scale, 1.0):
        raise ArithmeticError(f"sampled fGn not real: max |imag| = {imag:.3g}")
    return xi.real


def _run_chunks(fn, gens: list, workers: int) -> np.ndarray:
    pieces = [gens[s] for s in chunk_slices(len(gens), _CHUNK)]
    if workers <= 1 or len(pieces) == 1:
        return np.concatenate([fn(p) for p in pieces])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.concatenate(list(pool.map(fn, pieces)))


def sample_fgn(
    e: CirculantEmbedding, rng: SeedLike = None, count: int = 1, workers: int = 1
) -> FgnSeries:
    """Draw ``count`` exact fGn series of length ``e.N``; values shape ``(count, N)``."""
    if int(count) != count or count < 1:
        raise ValueError("count must be a positive integer")
    gens = path_generators(rng, int(count))
    values = _run_chunks(lambda g: _fgn_chunk(e, g), gens, workers)
    return FgnSeries(values, e.H)


def fgn_to_fbm(x: FgnSeries, T: float) -> FbmPath:
    """Scale unit-grid fGn to the grid ``k T / N`` and integrate, prepending B_0 = 0."""
    if not T > 0:
        raise ValueError(f"horizon T must be positive, got {T!r}")
    N = x.N
    dt = T / N
    inc = dt**x.H.value * np.asarray(x.values)
    zeros = np.zeros(inc.shape[:-1] + (1,))
    values = np.concatenate([zeros, np.cumsum(inc, axis=-1)], axis=-1)
    times = dt * np.arange(N + 1)
    return FbmPath(times, values, x.H)


def simulate_fbm(
    H: HurstLike, N: int, T: float = 1.0, rng: SeedLike = None, count: int = 1, workers: int = 1
) -> FbmPath:
    """Convenience wrapper: ``count`` fBm paths on ``[0, T]`` with ``N`` steps."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if not is_power_of_two_plus_one(N):
        log.debug("N - 1 = %d is not a power of two; FFT length M = %d", N - 1, 2 * (N - 1))
    return fgn_to_fbm(sample_fgn(build_embedding(H, N), rng, count, workers), T)


def cholesky_factor(H: HurstLike, N: int) -> np.ndarray:
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    if N > CHOLESKY_MAX_N:
        raise ValueError(f"dense Cholesky oracle is capped at N = {CHOLESKY_MAX_N}")
    try:
        return linalg.cholesky(fgn_covariance_matrix(H, int(N)), lower=True)
    except linalg.LinAlgError as exc:
        raise ArithmeticError("fGn covariance is not numerically positive definite") from exc


def cholesky_sample_oracle(
    H: HurstLike, N: int, rng: SeedLike = None, count: int = 1, workers: int = 1
) -> FgnSeries:
    """Brute-force fGn sampler: lower Cholesky factor times standard normal vectors."""
    if int(count) != count or count < 1:
        raise ValueError("count must be a positive integer")
    H = as_hurst(H)
    L = cholesky_factor(H, N)
    gens = path_generators(rng, int(count))

    def chunk(gs):
        return np.stack([g.standard_normal(int(N)) for g in gs]) @ L.T

    return FgnSeries(_run_chunks(chunk, gens, workers), H)
