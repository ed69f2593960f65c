import math

import numpy as np
import pytest
from scipy import integrate

from telokit.analytic import (
    DensityCurve,
    TransportSolution,
    bell_polynomial,
    beta_approx,
    erlang_explicit_boundary,
    erlang_explicit_n1,
    explicit_exponential_case,
    grid_oracle_n1,
)
from telokit.distributions import ErlangLaw, ScaledParams, UniformShortening, initial_from_erlang
from telokit.errors import CapacityError, ConfigError, UnsupportedLawError

PARAMS = ScaledParams(b=1.0, N=40.0, law=UniformShortening(0.0, 1.0))
N0_EXP = initial_from_erlang(ErlangLaw(1, 4.0))
N0_GAMMA = initial_from_erlang(ErlangLaw(2, 1.5))


class TestDensityCurve:
    def test_validation(self):
        with pytest.raises(ValueError):
            DensityCurve(np.array([0.0, 1.0, 1.5]), np.zeros(3))
        with pytest.raises(ValueError):
            DensityCurve(np.array([0.0, 1.0]), np.array([1.0, np.nan]))

    def test_mass_and_interp(self):
        x = np.linspace(0.0, 1.0, 101)
        curve = DensityCurve(x, 2.0 * x)
        assert curve.mass() == pytest.approx(1.0)
        assert curve(0.25) == pytest.approx(0.5)

    def test_csv(self, tmp_path):
        x = np.linspace(0.0, 1.0, 11)
        curve = DensityCurve(x, x ** 2)
        path = tmp_path / "c.csv"
        curve.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "x,value"
        assert len(lines) == 12


class TestTransportSolution:
    def test_initial_condition(self):
        sol = TransportSolution(N0_EXP, PARAMS)
        x = np.linspace(0.0, 3.0, 50)
        assert np.allclose(sol.u1(0.0, x), N0_EXP.pdf(x))

    def test_exponential_boundary_closed_form(self):
        # n0 = h(1,4), b*m1 = 1/2: boundary flux is 2*exp(-2t)
        sol = TransportSolution(N0_EXP, PARAMS)
        t = np.linspace(0.0, 4.0, 60)
        assert np.allclose(sol.u1_boundary(t), 2.0 * np.exp(-2.0 * t), rtol=1e-12)

    def test_boundary_total_mass(self):
        sol = TransportSolution(N0_GAMMA, PARAMS)
        val, _ = integrate.quad(sol.u1_boundary, 0.0, np.inf, limit=200)
        assert val == pytest.approx(1.0, abs=1e-9)

    def test_u2k_boundary_total_mass(self):
        for k in (1, 2, 5, 16):
            sol = TransportSolution(N0_GAMMA, PARAMS, k=k)
            val, _ = integrate.quad(sol.u2k_boundary, 0.0, np.inf, limit=300)
            assert val == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("k", [1, 2, 5, 16])
    def test_tail_identity(self, k):
        # integral of the 2k boundary flux from t equals [n0 tail]^2k
        sol = TransportSolution(N0_GAMMA, PARAMS, k=k)
        for t in np.linspace(0.0, 4.0, 9):
            lhs, _ = integrate.quad(sol.u2k_boundary, t, np.inf, limit=300)
            assert lhs == pytest.approx(float(sol.u2k_tail(t)), abs=1e-8)

    def test_u2k_matches_product(self):
        sol = TransportSolution(N0_GAMMA, PARAMS, k=2)
        x = np.array([0.1, 0.5, 1.0, 2.0])
        t = 0.7
        expected = np.prod(N0_GAMMA.pdf(PARAMS.bm1 * t / 2.0 + x))
        assert sol.u2k(t, x) == pytest.approx(float(expected), rel=1e-12)

    def test_characteristic_pde_residual_scales_linearly(self):
        # forward-difference residual of u_t - b*m1*u_x shrinks like h
        sol = TransportSolution(N0_GAMMA, PARAMS)
        bm1 = PARAMS.bm1
        t, x = 0.8, 0.6

        def residual(h):
            ut = (sol.u1(t + h, x) - sol.u1(t, x)) / h
            ux = (sol.u1(t, x + h) - sol.u1(t, x)) / h
            return abs(ut - bm1 * ux)

        r3, r4 = residual(1e-3), residual(1e-4)
        assert r3 < 1e-3
        assert 5.0 < r3 / r4 < 20.0


class TestExponentialCase:
    def test_beta_N1_value(self):
        case = explicit_exponential_case(PARAMS, N0_EXP)
        assert case.beta_N == pytest.approx(3.869934428767614, rel=1e-12)

    def test_beta_N_tends_to_beta(self):
        vals = [
            beta_approx(ScaledParams(b=1.0, N=N, law=PARAMS.law), 4.0)
            for N in (1e2, 1e3, 1e4, 1e5)
        ]
        errs = [abs(v - 4.0) for v in vals]
        assert all(a > b for a, b in zip(errs, errs[1:]))
        assert errs[-1] < 1e-3

    def test_k1_power_consistency(self):
        assert beta_approx(PARAMS, 4.0, k=1) == pytest.approx(
            beta_approx(PARAMS, 4.0), rel=1e-14
        )

    def test_boundary_is_probability_density(self):
        case = explicit_exponential_case(PARAMS, N0_EXP, k=5)
        val, _ = integrate.quad(case.boundary, 0.0, np.inf)
        assert val == pytest.approx(1.0, rel=1e-10)
        assert case.tail(0.0) == 1.0

    def test_rejects_non_exponential(self):
        with pytest.raises(UnsupportedLawError):
            explicit_exponential_case(PARAMS, N0_GAMMA)


class TestBellPolynomial:
    def test_base_cases(self):
        assert bell_polynomial([]) == 1.0
        assert bell_polynomial([3.0]) == 3.0

    def test_hand_recurrence(self):
        a1, a2, a3 = 2.0, -1.0, 0.5
        assert bell_polynomial([a1, a2]) == pytest.approx(a1 ** 2 + a2)
        assert bell_polynomial([a1, a2, a3]) == pytest.approx(a1 ** 3 + 3 * a1 * a2 + a3)

    @pytest.mark.parametrize("m", [1, 2, 3, 5, 8])
    def test_single_argument_power(self, m):
        x = 1.7
        coeffs = [-x] + [0.0] * (m - 1)
        assert bell_polynomial(coeffs) == pytest.approx((-x) ** m, rel=1e-12)

    def test_vectorised_first_argument(self):
        a1 = np.array([1.0, 2.0, 3.0])
        out = bell_polynomial([a1, 4.0])
        assert np.allclose(out, a1 ** 2 + 4.0)


class TestErlangExplicit:
    def test_initial_condition(self):
        law = ErlangLaw(2, 1.5)
        x = np.linspace(0.0, 4.0, 41)
        assert np.allclose(erlang_explicit_n1(PARAMS, law, 0.0, x), law.pdf(x), atol=1e-13)

    def test_shape_one_reduces_to_exponential_solution(self):
        # both give C*exp(-bN(1 - laplace_g(beta/N))t - beta*x) at shape 1
        law = ErlangLaw(1, 4.0)
        rate = PARAMS.b_tilde * (1.0 - float(PARAMS.law.laplace(4.0 / PARAMS.N)))
        ts, xs = np.meshgrid(np.linspace(0, 2, 9), np.linspace(0, 3, 9))
        for t, x in zip(ts.ravel(), xs.ravel()):
            expected = 4.0 * math.exp(-rate * t - 4.0 * x)
            assert erlang_explicit_n1(PARAMS, law, t, x) == pytest.approx(
                expected, rel=1e-12
            )

    def test_against_grid_oracle(self):
        law = ErlangLaw(2, 1.5)
        oracle = grid_oracle_n1(
            PARAMS, N0_GAMMA, t_max=1.0, x_max=6.0, snapshot_times=(0.5, 1.0)
        )
        for t, curve in oracle.snapshots.items():
            sel = curve.x <= 3.0
            exact = erlang_explicit_n1(PARAMS, law, t, curve.x[sel])
            assert np.max(np.abs(exact - curve.values[sel])) < 1e-3

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            erlang_explicit_n1(PARAMS, ErlangLaw(13, 1.0), 0.1, 0.1)

    def test_boundary_quadrature_mass(self):
        law = ErlangLaw(2, 1.5)
        val, _ = integrate.quad(
            lambda t: erlang_explicit_boundary(PARAMS, law, t), 0.0, 40.0, limit=300
        )
        assert val == pytest.approx(1.0, abs=1e-6)


class TestGridOracle:
    def test_flux_matches_exponential_solution(self):
        case = explicit_exponential_case(PARAMS, N0_EXP)
        oracle = grid_oracle_n1(PARAMS, N0_EXP, t_max=4.0, x_max=8.0)
        exact = case.boundary(oracle.times)
        assert np.max(np.abs(oracle.flux - exact)) < 1e-3

    def test_mass_conservation(self):
        oracle = grid_oracle_n1(
            PARAMS, N0_EXP, t_max=3.0, x_max=7.0, dx=PARAMS.delta_tilde / 32.0
        )
        assert np.max(np.abs(oracle.mass - 1.0)) < 1e-4

    def test_nonnegative_preserving(self):
        oracle = grid_oracle_n1(PARAMS, N0_GAMMA, t_max=1.5, x_max=5.0)
        assert oracle.final.values.min() > -1e-12

    def test_transport_error_scales_like_one_over_N(self):
        # sup flux error vs the transport boundary at N in {10, 20, 40}:
        # N * error should be stable within a factor of 2 per doubling
        errors = []
        for N in (10.0, 20.0, 40.0):
            params = ScaledParams(b=1.0, N=N, law=PARAMS.law)
            n0 = initial_from_erlang(ErlangLaw(1, 4.0))
            sol = TransportSolution(n0, params)
            oracle = grid_oracle_n1(params, n0, t_max=2.0, x_max=5.0)
            errors.append(
                float(np.max(np.abs(oracle.flux - sol.u1_boundary(oracle.times))))
            )
        r1 = errors[0] / errors[1]
        r2 = errors[1] / errors[2]
        assert 1.0 < r1 < 4.0
        assert 1.0 < r2 < 4.0

    def test_snapshot_times_recorded(self):
        oracle = grid_oracle_n1(PARAMS, N0_EXP, t_max=1.0, x_max=3.0, snapshot_times=(0.0, 0.5))
        assert set(oracle.snapshots) == {0.0, 0.5}
        assert np.allclose(oracle.snapshots[0.0].values, N0_EXP.pdf(oracle.x))

    def test_stability_guards(self):
        with pytest.raises(ConfigError):
            grid_oracle_n1(PARAMS, N0_EXP, t_max=1.0, x_max=3.0, dx=PARAMS.delta_tilde / 2.0)
        with pytest.raises(ConfigError):
            grid_oracle_n1(PARAMS, N0_EXP, t_max=1.0, x_max=3.0, dt=1.0 / PARAMS.b_tilde)
