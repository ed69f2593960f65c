import math

import numpy as np
import pytest
from scipy import integrate

from telokit.distributions import (
    ErlangLaw,
    ScaledParams,
    TabulatedShortening,
    UniformShortening,
    erlang_from_cv,
    fit_tail_constants,
    initial_from_erlang,
    second_derivative_l2_norm,
    validate_shortening_law,
    verification_grid,
)
from telokit.errors import InfeasibleError


class TestUniformShortening:
    def test_laplace_total_mass(self):
        law = UniformShortening(0.0, 1.0)
        assert law.laplace(0.0) == 1.0

    def test_laplace_closed_form(self):
        # antiderivative of exp(-s*u) on [0, 1] at s = 1
        law = UniformShortening(0.0, 1.0)
        assert law.laplace(1.0) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-15)

    def test_laplace_decays_to_zero(self):
        law = UniformShortening(0.0, 1.0)
        vals = [law.laplace(s) for s in (1.0, 10.0, 100.0, 2000.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-3

    def test_laplace_decreasing_and_convex(self):
        law = UniformShortening(0.0, 1.0)
        s = np.linspace(0.0, 20.0, 100)
        vals = np.asarray(law.laplace(s))
        assert np.all(np.diff(vals) < 0)
        assert np.all(np.diff(vals, 2) > 0)

    def test_laplace_negative_argument_rejected(self):
        with pytest.raises(ValueError):
            UniformShortening(0.0, 1.0).laplace(-0.5)

    def test_moments_shifted_support(self):
        law = UniformShortening(5.0, 10.0)
        assert law.m1 == pytest.approx(7.5)
        assert law.m2 == pytest.approx((25.0 + 50.0 + 100.0) / 3.0)
        assert law.delta == 10.0
        validate_shortening_law(law)

    def test_laplace_matches_quadrature_on_shifted_support(self):
        law = UniformShortening(5.0, 10.0)
        for s in (0.01, 0.3, 2.0):
            ref, _ = integrate.quad(lambda u: math.exp(-s * u) / 5.0, 5.0, 10.0)
            assert law.laplace(s) == pytest.approx(ref, rel=1e-12)

    def test_laplace_deriv_matches_quadrature(self):
        law = UniformShortening(0.0, 1.0)
        for order in (1, 2, 3, 5):
            for s in (0.0, 0.05, 1.3):
                ref, _ = integrate.quad(
                    lambda u: (-u) ** order * math.exp(-s * u), 0.0, 1.0
                )
                assert law.laplace_deriv(s, order) == pytest.approx(ref, rel=1e-10)

    def test_invalid_support(self):
        with pytest.raises(ValueError):
            UniformShortening(-1.0, 1.0)
        with pytest.raises(ValueError):
            UniformShortening(2.0, 2.0)


class TestTabulatedShortening:
    def _triangular(self):
        x = np.linspace(0.0, 2.0, 401)
        vals = np.where(x <= 1.0, x, 2.0 - x)
        return TabulatedShortening(x, vals)

    def test_moments_against_closed_form(self):
        law = self._triangular()
        assert law.m1 == pytest.approx(1.0, abs=1e-4)
        assert law.m2 == pytest.approx(7.0 / 6.0, abs=1e-3)
        validate_shortening_law(law, tol=1e-4)

    def test_laplace_matches_quadrature(self):
        law = self._triangular()
        ref, _ = integrate.quad(lambda u: math.exp(-u) * (u if u <= 1 else 2 - u), 0, 2)
        assert law.laplace(1.0) == pytest.approx(ref, abs=1e-5)

    def test_mass_validation(self):
        x = np.linspace(0.0, 1.0, 101)
        with pytest.raises(ValueError):
            TabulatedShortening(x, np.full_like(x, 2.0))

    def test_sampling_matches_cdf(self):
        law = self._triangular()
        rng = np.random.Generator(np.random.Philox(key=1))
        draws = law.sample(rng, 50_000)
        # median of the triangular law on [0, 2] is 1
        assert np.median(draws) == pytest.approx(1.0, abs=0.02)

    def test_laplace_decreasing_and_convex(self):
        law = self._triangular()
        s = np.linspace(0.0, 10.0, 100)
        vals = np.asarray(law.laplace(s))
        assert vals[0] == pytest.approx(1.0, abs=1e-9)
        assert np.all(np.diff(vals) < 0)
        assert np.all(np.diff(vals, 2) > 0)


class TestScaledParams:
    def test_rescaling_identities(self):
        law = UniformShortening(0.0, 1.0)
        params = ScaledParams(b=1.0, N=40.0, law=law)
        assert params.b_tilde == 40.0
        assert params.delta_tilde == pytest.approx(0.025)
        # the drift identity holds exactly, not just approximately
        assert params.b_tilde * params.m1_tilde == params.b * law.m1
        assert params.bm1 == 0.5

    def test_rescaled_density_has_unit_mass(self):
        law = UniformShortening(0.0, 1.0)
        params = ScaledParams(b=2.0, N=25.0, law=law)
        xs = np.linspace(0.0, params.delta_tilde, 2001)
        mass = np.trapezoid(params.g_tilde_pdf(xs), xs)
        assert mass == pytest.approx(1.0, abs=1e-3)

    def test_invalid_parameters(self):
        law = UniformShortening(0.0, 1.0)
        with pytest.raises(ValueError):
            ScaledParams(b=-1.0, N=40.0, law=law)
        with pytest.raises(ValueError):
            ScaledParams(b=1.0, N=0.0, law=law)


class TestErlangLaw:
    def test_pdf_at_origin(self):
        assert ErlangLaw(1, 4.0).pdf(0.0) == pytest.approx(4.0)
        assert ErlangLaw(2, 4.0).pdf(0.0) == 0.0

    def test_moments(self):
        law = ErlangLaw(2, 1.5)
        assert law.mean == pytest.approx(2.0 / 1.5)
        assert law.variance == pytest.approx(2.0 / 1.5 ** 2)
        assert law.cv == pytest.approx(1.0 / math.sqrt(2.0))

    def test_quantile_exponential_median(self):
        assert ErlangLaw(1, 1.0).quantile(0.5) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_quantile_cdf_roundtrip(self):
        for law in (ErlangLaw(1, 4.0), ErlangLaw(2, 1.5), ErlangLaw(9, 9.0)):
            xs = np.linspace(law.quantile(1e-6), law.quantile(1.0 - 1e-6), 200)
            back = np.array([law.quantile(float(law.cdf(x))) for x in xs])
            assert np.max(np.abs(back - xs)) < 1e-9

    def test_quantile_domain(self):
        with pytest.raises(ValueError):
            ErlangLaw(1, 1.0).quantile(0.0)
        with pytest.raises(ValueError):
            ErlangLaw(1, 1.0).quantile(1.0)

    def test_cdf_matches_quadrature(self):
        law = ErlangLaw(3, 2.0)
        for x in (0.3, 1.0, 4.0):
            ref, _ = integrate.quad(law.pdf, 0.0, x)
            assert law.cdf(x) == pytest.approx(ref, rel=1e-10)
            assert law.sf(x) == pytest.approx(1.0 - ref, rel=1e-9)

    def test_derivatives_match_finite_differences(self):
        law = ErlangLaw(4, 3.0)
        h = 1e-6
        for x in (0.05, 0.4, 1.7):
            d1 = (law.pdf(x + h) - law.pdf(x - h)) / (2 * h)
            d2 = (law.pdf(x + h) - 2 * law.pdf(x) + law.pdf(x - h)) / h ** 2
            assert law.pdf_deriv1(x) == pytest.approx(d1, rel=1e-6, abs=1e-6)
            assert law.pdf_deriv2(x) == pytest.approx(d2, rel=1e-3, abs=1e-3)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            ErlangLaw(0, 1.0)
        with pytest.raises(ValueError):
            ErlangLaw(2, -1.0)

    def test_erlang_from_cv(self):
        law = erlang_from_cv(0.5)
        assert (law.shape, law.rate) == (4, 4.0)
        assert law.mean == pytest.approx(1.0)
        with pytest.raises(ValueError):
            erlang_from_cv(0.3)


class TestSecondDerivativeNorm:
    # reference values recomputed independently at tighter tolerance in the
    # acceptance suite
    @pytest.mark.parametrize(
        "cv_denom,expected",
        [(2, 5.657), (3, 9.445), (5, 28.17), (7, 62.41)],
    )
    def test_low_variability_norms(self, cv_denom, expected):
        law = erlang_from_cv(1.0 / cv_denom)
        assert second_derivative_l2_norm(law) == pytest.approx(expected, rel=5e-3)

    def test_exponential_closed_form(self):
        # (h''_{1,b})^2 integrates to b^6/(2b)
        law = ErlangLaw(1, 2.0)
        assert second_derivative_l2_norm(law) == pytest.approx(
            math.sqrt(2.0 ** 5 / 2.0), rel=1e-8
        )


class TestTailConstants:
    def test_exponential_analytic_suprema(self):
        # pure exponential: suprema of the weighted envelopes sit at x = 0
        n0 = fit_tail_constants(ErlangLaw(1, 4.0), lam=2.0)
        assert n0.C_lam == pytest.approx(64.0, rel=1e-9)
        assert n0.Cprime_lam == pytest.approx(16.0, rel=1e-9)
        assert n0.D_lam == pytest.approx(2.0, rel=1e-9)
        assert n0.omega == 4.0
        assert n0.D_omega == pytest.approx(1.0)
        assert n0.h4_verified

    def test_lambda_close_to_rate_stays_finite(self):
        n0 = fit_tail_constants(ErlangLaw(1, 4.0), lam=4.0 - 1e-6)
        assert np.isfinite(n0.C_lam) and np.isfinite(n0.D_lam)

    def test_lambda_at_rate_rejected(self):
        with pytest.raises(InfeasibleError):
            fit_tail_constants(ErlangLaw(1, 4.0), lam=4.0)

    def test_grid_supremum_against_dense_scan(self):
        law = ErlangLaw(2, 1.5)
        n0 = fit_tail_constants(law, lam=1.0)
        dense = np.linspace(1e-9, 40.0, 400_001)
        c_ref = np.max(np.abs(law.pdf_deriv2(dense)) * np.exp(dense))
        cp_ref = np.max(np.abs(law.pdf_deriv1(dense)) * np.exp(dense))
        d_ref = np.max(law.pdf(dense) * np.exp(dense)) / 1.0
        assert n0.C_lam == pytest.approx(c_ref, rel=1e-3)
        assert n0.Cprime_lam == pytest.approx(cp_ref, rel=1e-3)
        assert n0.D_lam == pytest.approx(max(d_ref, 1.0), rel=1e-3)

    def test_envelopes_hold_on_verification_grid(self):
        n0 = initial_from_erlang(ErlangLaw(2, 1.5))
        grid = verification_grid(n0.lam)
        env = np.exp(-n0.lam * grid)
        assert np.all(np.abs(n0.pdf_deriv2(grid)) <= n0.C_lam * env * (1 + 1e-9))
        assert np.all(np.abs(n0.pdf_deriv1(grid)) <= n0.Cprime_lam * env * (1 + 1e-9))
        assert np.all(n0.pdf(grid) <= n0.D_lam * n0.lam * env * (1 + 1e-9))
        # lower envelope with f(x) = x^(shape-1)
        shape, omega = n0.erlang.shape, n0.omega
        norm = math.gamma(shape) / omega ** shape
        lower = n0.D_omega * grid ** (shape - 1) * np.exp(-omega * grid) / norm
        assert np.all(n0.pdf(grid) >= lower * (1 - 1e-9))

    def test_omega_above_rate(self):
        law = ErlangLaw(2, 1.5)
        n0 = fit_tail_constants(law, lam=1.0, omega=2.0)
        assert n0.D_omega == pytest.approx((1.5 / 2.0) ** 2)

    def test_tabulated_path_records_h4_unverified(self):
        law = ErlangLaw(2, 1.5)
        x = np.linspace(0.0, 30.0, 4001)
        vals = law.pdf(x)
        n0 = fit_tail_constants((x, vals), lam=1.0)
        assert not n0.h4_verified
        assert n0.D_omega is None
        assert n0.C_lam == pytest.approx(fit_tail_constants(law, 1.0).C_lam, rel=0.05)
