import mpmath as mp
import numpy as np
import pytest
from scipy import special

from fbmkit.cov import fbm_covariance, variogram
from fbmkit.kernels import (
    VOLTERRA_LOW_H_VARIANT,
    KernelKind,
    QuadratureSpec,
    VolterraVariant,
    ha_constant,
    ha_integral,
    kernel_inner_product,
    kernel_value,
    ma_constant,
    select_volterra_variant,
    volterra_beta_identity_check,
    volterra_constant,
)

TIMES = (0.5, 1.0, 2.0)


class TestConstants:
    def test_ma_brownian(self):
        forms = ma_constant(0.5)
        assert forms.integral == pytest.approx(1.0, abs=1e-12)
        assert forms.closed == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("H", [0.05, 0.3, 0.6, 0.7, 0.8, 0.95])
    def test_ma_integral_matches_closed_form(self, H):
        forms = ma_constant(H)
        assert forms.integral == pytest.approx(forms.closed, abs=1e-6)

    @pytest.mark.parametrize("H", [0.3, 0.7])
    def test_ma_integral_against_mpmath(self, H):
        mp.mp.dps = 25
        mu = mp.mpf(H) - mp.mpf(1) / 2
        integral = mp.quad(lambda x: ((x + 1) ** mu - x**mu) ** 2, [0, 1, 10, mp.inf])
        expected = float((1 / (2 * mp.mpf(H)) + integral) ** -0.5)
        assert ma_constant(H).integral == pytest.approx(expected, abs=1e-8)

    def test_ha_brownian(self):
        assert ha_integral(0.5).integral == pytest.approx(np.pi / 2, abs=1e-6)
        assert ha_constant(0.5).closed == pytest.approx(1 / np.sqrt(np.pi), abs=1e-12)
        assert ha_constant(0.5).integral == pytest.approx(0.564190, abs=1e-6)

    @pytest.mark.parametrize("H", [0.1, 0.3, 0.6, 0.8, 0.9])
    def test_ha_integral_matches_closed_form(self, H):
        forms = ha_integral(H)
        assert forms.integral == pytest.approx(forms.closed, abs=1e-4)

    def test_ha_constant_closed_form_identity(self):
        for H in (0.2, 0.5, 0.85):
            expected = np.sqrt(special.gamma(2 * H + 1) * np.sin(np.pi * H) / np.pi)
            assert ha_constant(H).closed == pytest.approx(expected, rel=1e-13)

    def test_ha_sweep_consistent(self):
        sweep = [ha_constant(H) for H in (0.3, 0.6, 0.8)]
        for forms in sweep:
            assert forms.integral == pytest.approx(forms.closed, rel=1e-6)

    @pytest.mark.parametrize("H", [0.55, 0.7, 0.9])
    def test_volterra_constant_relation(self, H):
        # K^V = (H - 1/2) K^MA, not K^MA itself
        assert volterra_constant(H) == pytest.approx((H - 0.5) * ma_constant(H).closed, rel=1e-12)


class TestKernelValues:
    def test_ma_brownian_is_indicator(self):
        xs = [-3.0, -0.5, 0.0, 0.3, 0.99, 1.0, 2.0]
        vals = [kernel_value("moving_average", 0.5, 1.0, x) for x in xs]
        assert vals == [0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0]

    @pytest.mark.parametrize("x", [-2.0, -0.1, 0.4, 5.0])
    def test_harmonizable_at_time_zero(self, x):
        assert kernel_value("harmonizable", 0.3, 0.0, x) == 0.0

    @pytest.mark.parametrize("H, x", [(0.7, 0.5), (0.7, 0.05), (0.9, 0.8), (0.3, 0.5), (0.2, 0.01)])
    def test_volterra_against_tanh_sinh(self, H, x):
        t = 1.0
        mp.mp.dps = 60
        xm, mu = mp.mpf(x), mp.mpf(H) - mp.mpf(1) / 2
        if H > 0.5:
            inner = mp.quad(lambda u: u**mu * (u - xm) ** (mu - 1), [xm, t])
            expected = volterra_constant(H) * float(xm**-mu * inner)
        else:
            inner = mp.quad(lambda u: u ** (mu - 1) * (u - xm) ** mu, [xm, t])
            expected = volterra_constant(H) * float(
                xm**-mu * t**mu * (t - xm) ** mu - mu * xm**-mu * inner
            )
        assert kernel_value("volterra", H, t, x) == pytest.approx(expected, rel=1e-8)

    @pytest.mark.parametrize("H", [0.3, 0.7])
    def test_volterra_support(self, H):
        for x in (-1.0, -1e-9, 1.0 + 1e-9, 3.0):
            assert kernel_value("volterra", H, 1.0, x) == 0.0

    def test_volterra_singular_points(self):
        with pytest.raises(ValueError):
            kernel_value("volterra", 0.7, 1.0, 0.0)
        with pytest.raises(ValueError):
            kernel_value("volterra", 0.3, 1.0, 1.0)
        assert kernel_value("volterra", 0.7, 1.0, 1.0) == 0.0

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            kernel_value("wavelet", 0.5, 1.0, 0.5)


class TestInnerProducts:
    @pytest.mark.parametrize("kind", list(KernelKind))
    def test_zero_time(self, kind):
        assert kernel_inner_product(kind, 0.6, 0.0, 0.0) == 0.0
        assert kernel_inner_product(kind, 0.6, 0.0, 1.0) == 0.0

    def test_volterra_variance(self):
        assert kernel_inner_product("volterra", 0.7, 1.0, 1.0) == pytest.approx(1.0, abs=1e-2)

    def test_moving_average_example(self):
        got = kernel_inner_product("moving_average", 0.3, 2.0, 1.0)
        assert got == pytest.approx(fbm_covariance(0.3, 2.0, 1.0), abs=1e-2)

    @pytest.mark.parametrize("kind", list(KernelKind))
    @pytest.mark.parametrize("H", [0.3, 0.6, 0.8])
    def test_variogram_reproduced(self, kind, H):
        q = QuadratureSpec()
        for t, s in ((0.5, 2.0), (1.0, 2.0)):
            tt = kernel_inner_product(kind, H, t, t, q)
            ss = kernel_inner_product(kind, H, s, s, q)
            ts = kernel_inner_product(kind, H, t, s, q)
            assert tt + ss - 2 * ts == pytest.approx(variogram(H, t, s), abs=2 * q.abs_tolerance)

    def test_ma_against_direct_real_line_quadrature(self):
        # oracle: integrate the kernel product itself over the real line with mpmath
        H, t, s = 0.7, 1.0, 2.0
        mp.mp.dps = 20
        f = lambda x: kernel_value("moving_average", H, t, float(x)) * kernel_value("moving_average", H, s, float(x))
        direct = float(mp.quad(f, [-mp.inf, -10, -1, 0, 1, 2]))
        assert kernel_inner_product("moving_average", H, t, s) == pytest.approx(direct, abs=1e-4)

    def test_harmonizable_against_direct_product(self):
        from scipy import integrate

        H, t, s = 0.6, 1.0, 0.5
        f = lambda x: kernel_value("harmonizable", H, t, x) * kernel_value("harmonizable", H, s, x)
        # truncated two-sided integral; the neglected tail is below 1e-3
        direct = sum(
            integrate.quad(f, a, b, limit=2000)[0]
            for a, b in ((-4000, -1), (-1, 0), (0, 1), (1, 4000))
        )
        assert kernel_inner_product("harmonizable", H, t, s) == pytest.approx(direct, abs=2e-3)

    def test_doubled_variant_fails_oracle(self):
        worst = select_volterra_variant(H_values=(0.3,), times=(1.0, 2.0))
        assert worst[VolterraVariant.SINGLE] < 1e-4
        assert worst[VolterraVariant.DOUBLED] > 1e-2
        assert VOLTERRA_LOW_H_VARIANT is VolterraVariant.SINGLE

    def test_quadrature_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(abs_tolerance=0)
        with pytest.raises(ValueError):
            QuadratureSpec(truncation_radius=-1)


class TestBetaIdentity:
    @pytest.mark.parametrize("H, u, v", [(0.75, 1, 2), (0.6, 0.5, 3), (0.9, 1, 1.5)])
    def test_agreement(self, H, u, v):
        numeric, closed = volterra_beta_identity_check(H, u, v)
        assert numeric == pytest.approx(closed, rel=1e-6)

    def test_against_mpmath(self):
        mp.mp.dps = 60
        H, u, v = mp.mpf("0.75"), mp.mpf(1), mp.mpf(2)
        mu = H - mp.mpf(1) / 2
        expected = mp.quad(lambda x: x ** (-2 * mu) * (u - x) ** (mu - 1) * (v - x) ** (mu - 1), [0, u])
        assert volterra_beta_identity_check(0.75, 1, 2)[0] == pytest.approx(float(expected), rel=1e-10)

    def test_diagonal_is_degenerate(self):
        with pytest.raises(ValueError, match="degenerate"):
            volterra_beta_identity_check(0.75, 1, 1)

    def test_needs_high_h(self):
        with pytest.raises(ValueError):
            volterra_beta_identity_check(0.4, 1, 2)
