import numpy as np
import pytest

from fbmkit.circulant import (
    CHOLESKY_MAX_N,
    FgnSeries,
    build_embedding,
    cholesky_factor,
    cholesky_sample_oracle,
    circulant_transform,
    embedding_first_row,
    fgn_to_fbm,
    is_power_of_two_plus_one,
    sample_fgn,
    simulate_fbm,
)
from fbmkit.cov import HurstParameter, fgn_autocovariance, fgn_covariance_matrix, variogram
from fbmkit.rng import path_generators

H_GRID = [0.1, 0.3, 0.5, 0.7, 0.9]


class TestEmbedding:
    def test_brownian_spectrum_is_flat(self):
        e = build_embedding(0.5, 5)
        assert e.M == 8
        np.testing.assert_allclose(e.lam, np.ones(8), atol=1e-15)

    def test_first_row_layout(self):
        c = embedding_first_row(0.7, 5)
        rho = fgn_autocovariance(0.7, np.arange(5))
        # M = 8: c_k = rho(k) for k <= 4, then rho(8 - k)
        expected = [rho[0], rho[1], rho[2], rho[3], rho[4], rho[3], rho[2], rho[1]]
        np.testing.assert_allclose(c, expected)

    @pytest.mark.parametrize("H", H_GRID)
    @pytest.mark.parametrize("N", [2, 3, 17, 1500, 2**10 + 1])
    def test_invariants(self, H, N):
        e = build_embedding(H, N)
        c = embedding_first_row(H, N)
        assert np.all(e.lam >= 0)
        assert e.lam[0] == pytest.approx(c.sum(), rel=1e-9)
        assert e.lam.sum() == pytest.approx(e.M, rel=1e-9)
        back = np.fft.ifft(e.lam)
        np.testing.assert_allclose(back.real, c, atol=1e-10)
        np.testing.assert_allclose(back.real[:N], fgn_autocovariance(H, np.arange(N)), atol=1e-10)

    def test_against_dense_circulant_eigenvalues(self):
        from scipy.linalg import circulant, eigvalsh

        c = embedding_first_row(0.8, 9)
        dense = np.sort(eigvalsh(circulant(c)))
        np.testing.assert_allclose(np.sort(build_embedding(0.8, 9).lam), dense, atol=1e-12)

    def test_lambda_is_read_only(self):
        e = build_embedding(0.6, 9)
        with pytest.raises(ValueError):
            e.lam[0] = 3.0

    @pytest.mark.parametrize("N", [1, 0, 2.5])
    def test_bad_size(self, N):
        with pytest.raises(ValueError):
            build_embedding(0.6, N)

    def test_power_of_two_helper(self):
        assert is_power_of_two_plus_one(1025) and is_power_of_two_plus_one(2049)
        assert not is_power_of_two_plus_one(1500)


class TestSampleFgn:
    def test_shape_and_metadata(self):
        x = sample_fgn(build_embedding(0.7, 33), 1, count=5)
        assert isinstance(x, FgnSeries) and x.values.shape == (5, 33)
        assert x.H == HurstParameter(0.7) and x.spacing == 1.0

    def test_count_must_be_positive(self):
        with pytest.raises(ValueError):
            sample_fgn(build_embedding(0.7, 9), 1, count=0)

    def test_deterministic(self):
        e = build_embedding(0.3, 257)
        a = sample_fgn(e, 42).values
        b = sample_fgn(e, 42).values
        assert a.tobytes() == b.tobytes()
        assert not np.array_equal(a, sample_fgn(e, 43).values)

    def test_worker_count_does_not_change_output(self):
        e = build_embedding(0.7, 129)
        a = sample_fgn(e, 9, count=300, workers=1).values
        b = sample_fgn(e, 9, count=300, workers=4).values
        assert a.tobytes() == b.tobytes()

    def test_path_i_uses_stream_i(self):
        # draw-order contract: row i depends only on child stream i
        e = build_embedding(0.7, 17)
        batch = sample_fgn(e, 5, count=70).values
        zeta = path_generators(5, 70)[66].standard_normal(e.M)
        row = circulant_transform(e, zeta).real[: e.N]
        np.testing.assert_array_equal(batch[66], row)

    @pytest.mark.parametrize("H", H_GRID)
    def test_output_is_real(self, H):
        e = build_embedding(H, 1025)
        zeta = np.random.default_rng(0).standard_normal((10, e.M))
        out = circulant_transform(e, zeta)
        assert np.abs(out.imag).max() <= 1e-8 * np.abs(out.real).max()

    def test_equals_dense_square_root(self):
        # S = Q Lambda^{1/2} Q* built explicitly from the unitary DFT matrix
        e = build_embedding(0.65, 9)
        M = e.M
        j = np.arange(M)
        Q = np.exp(-2j * np.pi * np.outer(j, j) / M) / np.sqrt(M)
        S = Q @ np.diag(np.sqrt(e.lam)) @ Q.conj().T
        np.testing.assert_allclose(S.imag, 0, atol=1e-12)
        np.testing.assert_allclose(S.real @ S.real.T, np.fft.ifft(e.lam).real[(j[None, :] - j[:, None]) % M], atol=1e-12)
        zeta = np.random.default_rng(1).standard_normal(M)
        np.testing.assert_allclose(circulant_transform(e, zeta), S @ zeta, atol=1e-12)

    def test_white_noise_autocovariance(self):
        n = 4000
        x = sample_fgn(build_embedding(0.5, 64), 3, count=n).values
        se = 1.0 / np.sqrt(n * 64)
        for lag in range(1, 6):
            assert abs(np.mean(x[:, lag:] * x[:, :-lag])) < 3 * se * np.sqrt(64 / (64 - lag))

    def test_lag_one_autocovariance(self):
        n = 10_000
        x = sample_fgn(build_embedding(0.7, 256), 8, count=n).values
        # per-path lag-one products averaged; paths are independent so use their spread
        per_path = np.mean(x[:, 1:] * x[:, :-1], axis=1)
        se = per_path.std(ddof=1) / np.sqrt(n)
        assert abs(per_path.mean() - fgn_autocovariance(0.7, 1)) < 4 * se

    def test_stationarity_halves_agree(self):
        n = 2000
        x = sample_fgn(build_embedding(0.8, 1025), 12, count=n).values
        first, second = x[:, :512], x[:, 512:1024]
        for lag in (0, 1, 5):
            a = np.mean(first[:, lag:] * first[:, : 512 - lag], axis=1)
            b = np.mean(second[:, lag:] * second[:, : 512 - lag], axis=1)
            d = a - b
            assert abs(d.mean()) < 4 * d.std(ddof=1) / np.sqrt(n)


class TestFgnToFbm:
    def test_unit_step(self):
        p = fgn_to_fbm(FgnSeries(np.ones(3), HurstParameter(0.5)), 3.0)
        np.testing.assert_allclose(p.times, [0, 1, 2, 3])
        np.testing.assert_allclose(p.values, [0, 1, 2, 3])

    def test_telescoping(self):
        x = np.random.default_rng(2).standard_normal(10)
        p = fgn_to_fbm(FgnSeries(x, HurstParameter(0.3)), 2.0)
        assert p.values[0] == 0.0
        assert p.values[-1] == pytest.approx(0.2**0.3 * x.sum(), rel=1e-12)
        assert np.all(np.diff(p.times) > 0)
        np.testing.assert_allclose(np.diff(p.times), 0.2)

    @pytest.mark.parametrize("T", [0.0, -1.0])
    def test_bad_horizon(self, T):
        with pytest.raises(ValueError):
            fgn_to_fbm(FgnSeries(np.ones(3), HurstParameter(0.5)), T)

    def test_scale_invariance_of_variogram(self):
        # same seed, two horizons: empirical variogram follows (k Delta)^{2H} for both
        n, N, H = 4000, 256, 0.7
        for T in (1.0, 50.0):
            p = simulate_fbm(H, N, T, rng=21, count=n)
            dt = p.spacing
            for k in (1, 4, 16):
                inc = p.values[:, k:] - p.values[:, :-k]
                emp = np.mean(inc[:, 0] ** 2)
                target = variogram(H, k * dt, 0.0)
                assert emp == pytest.approx(target, rel=4 * np.sqrt(2.0 / n))


class TestCholeskyOracle:
    def test_brownian_factor_is_identity(self):
        np.testing.assert_allclose(cholesky_factor(0.5, 16), np.eye(16), atol=1e-14)

    def test_single_point(self):
        x = cholesky_sample_oracle(0.7, 1, 4, count=3).values
        z = np.array([g.standard_normal(1)[0] for g in path_generators(4, 3)])
        np.testing.assert_array_equal(x[:, 0], z)

    def test_cap(self):
        with pytest.raises(ValueError):
            cholesky_sample_oracle(0.7, CHOLESKY_MAX_N + 1, 0)

    def test_factor_reproduces_covariance(self):
        L = cholesky_factor(0.3, 50)
        np.testing.assert_allclose(L @ L.T, fgn_covariance_matrix(0.3, 50), atol=1e-12)

    @pytest.mark.parametrize("H", [0.3, 0.7])
    def test_two_sample_agreement_with_circulant(self, H):
        # standardised entrywise difference of two independent covariance estimates
        n, N = 10_000, 32
        a = sample_fgn(build_embedding(H, N), 100, n).values
        b = cholesky_sample_oracle(H, N, 200, n).values
        C = fgn_covariance_matrix(H, N)
        se = np.sqrt((C**2 + np.outer(np.diag(C), np.diag(C))) / n)
        z = (a.T @ a / n - b.T @ b / n) / (np.sqrt(2) * se)
        # ~500 distinct entries; 4.5 is a safe maximum for that many normals
        assert np.abs(z).max() < 4.5


def test_terminal_variance_matches_t_power():
    p = simulate_fbm(0.7, 2**10 + 1, 1.0, rng=77, count=10_000)
    assert np.var(p.values[:, -1]) == pytest.approx(1.0, abs=3 * np.sqrt(2 / 10_000))
