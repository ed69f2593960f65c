"""Scalar probability laws: shortening distributions, their rescaling, the
Erlang family, and exponential tail-envelope constants for initial densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import InfeasibleError, UnsupportedLawError

# Number of points of the geometric verification grid used when fitting and
# checking tail-envelope constants.
VERIFICATION_GRID_SIZE = 10_000

# The verification grid extends to the length where exp(-lam*x) = exp(-32),
# i.e. below 1e-13; envelope suprema beyond that point are negligible.
TAIL_CUTOFF_EXPONENT = 32.0


def _truncated_power_exp_integral(j, s, width):
    """Integral of u^j * exp(-s*u) over [0, width].

    Series evaluation for small s*width (avoids the catastrophic cancellation
    of the integration-by-parts recursion), incomplete-gamma form otherwise.
    """
    z = s * width
    if z < 1.0:
        total = 0.0
        term = 1.0
        m = 0
        while True:
            contrib = term / (j + m + 1)
            total += contrib
            m += 1
            term *= -z / m
            if abs(term) / (j + m + 1) < 1e-18 * max(abs(total), 1e-300):
                break
        return width ** (j + 1) * total
    return special.gammainc(j + 1, z) * math.factorial(j) / s ** (j + 1)


class UniformShortening:
    """Uniform shortening law on [low, high], 0 <= low < high = delta."""

    def __init__(self, low, high):
        low = float(low)
        high = float(high)
        if not (0.0 <= low < high):
            raise ValueError(f"uniform law needs 0 <= low < high, got [{low}, {high}]")
        self.low = low
        self.high = high
        self.delta = high
        self.m1 = 0.5 * (low + high)
        self.m2 = (low * low + low * high + high * high) / 3.0

    def __repr__(self):
        return f"UniformShortening({self.low:g}, {self.high:g})"

    def __eq__(self, other):
        return (
            isinstance(other, UniformShortening)
            and self.low == other.low
            and self.high == other.high
        )

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.low) & (x <= self.high)
        return np.where(inside, 1.0 / (self.high - self.low), 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.low) / (self.high - self.low), 0.0, 1.0)

    def laplace(self, s):
        """Laplace transform E[exp(-s*V)], exact closed form."""
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise ValueError("Laplace transform requires s >= 0")
        with np.errstate(invalid="ignore", divide="ignore"):
            val = -np.exp(-s * self.low) * np.expm1(-s * (self.high - self.low))
            val = val / (s * (self.high - self.low))
        out = np.where(s == 0.0, 1.0, val)
        return out if out.ndim else float(out)

    def laplace_deriv(self, s, order):
        """order-th derivative of the Laplace transform at s >= 0."""
        if s < 0:
            raise ValueError("Laplace transform requires s >= 0")
        width = self.high - self.low
        # int_low^high u^j e^{-su} du expanded around the lower endpoint
        total = 0.0
        for i in range(order + 1):
            total += (
                math.comb(order, i)
                * self.low ** (order - i)
                * _truncated_power_exp_integral(i, s, width)
            )
        return (-1.0) ** order * math.exp(-s * self.low) * total / width

    def sample(self, rng, size=None):
        return rng.uniform(self.low, self.high, size)


class TabulatedShortening:
    """Shortening law given by density samples on a grid covering [0, delta].

    The tabulated density is renormalised to unit mass under trapezoid
    quadrature; moments, CDF and Laplace transform use the same rule.
    """

    def __init__(self, x, values):
        x = np.asarray(x, dtype=float)
        values = np.asarray(values, dtype=float)
        if x.ndim != 1 or x.shape != values.shape or x.size < 3:
            raise ValueError("need matching 1-d arrays with at least 3 nodes")
        if np.any(np.diff(x) <= 0) or x[0] < 0:
            raise ValueError("grid must be strictly increasing and nonnegative")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("density values must be finite and nonnegative")
        mass = np.trapezoid(values, x)
        if abs(mass - 1.0) > 1e-4:
            raise ValueError(f"tabulated density mass {mass:.8f} is not 1")
        self.x = x
        self.values = values / mass
        self.delta = float(x[-1])
        self.m1 = float(np.trapezoid(x * self.values, x))
        self.m2 = float(np.trapezoid(x * x * self.values, x))
        cdf = integrate.cumulative_trapezoid(self.values, x, initial=0.0)
        self._cdf = np.minimum(cdf, 1.0)

    def pdf(self, x):
        return np.interp(x, self.x, self.values, left=0.0, right=0.0)

    def cdf(self, x):
        return np.interp(x, self.x, self._cdf, left=0.0, right=1.0)

    def laplace(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise ValueError("Laplace transform requires s >= 0")
        out = np.trapezoid(
            np.exp(-np.atleast_1d(s)[:, None] * self.x[None, :]) * self.values,
            self.x,
            axis=1,
        )
        return float(out[0]) if s.ndim == 0 else out

    def laplace_deriv(self, s, order):
        if s < 0:
            raise ValueError("Laplace transform requires s >= 0")
        integrand = (-self.x) ** order * np.exp(-s * self.x) * self.values
        return float(np.trapezoid(integrand, self.x))

    def sample(self, rng, size=None):
        u = rng.uniform(0.0, 1.0, size)
        return np.interp(u, self._cdf, self.x)


def validate_shortening_law(law, tol=1e-10):
    """Check the structural invariants of a shortening law.

    Unit mass, moment ordering m1^2 <= m2 <= delta*m1, and a nondecreasing
    primitive with G(0) = 0, G(delta) = 1.
    """
    if not (0.0 < law.m1 <= law.delta + tol):
        raise ValueError("first moment must satisfy 0 < m1 <= delta")
    if not (law.m1 ** 2 - tol <= law.m2 <= law.delta * law.m1 + tol):
        raise ValueError("second moment must satisfy m1^2 <= m2 <= delta*m1")
    if abs(float(law.laplace(0.0)) - 1.0) > tol:
        raise ValueError("density does not integrate to 1")
    grid = np.linspace(0.0, law.delta * 1.5, 301)
    G = np.asarray(law.cdf(grid))
    if np.any(np.diff(G) < -tol) or abs(G[0]) > tol or abs(G[-1] - 1.0) > tol:
        raise ValueError("primitive G must rise from 0 to 1 on [0, delta]")
    return True


@dataclass(frozen=True)
class ScaledParams:
    """Division/shortening parameters together with their rescaled versions.

    The raw model runs at division rate b_tilde = b*N with shortening density
    g_tilde(x) = N*g(N*x) on [0, delta/N]; the product b_tilde*m1_tilde equals
    b*m1 exactly, which is the drift of the transport limit.
    """

    b: float
    N: float
    law: object

    def __post_init__(self):
        if self.b <= 0 or self.N <= 0:
            raise ValueError("b and N must be positive")

    @property
    def b_tilde(self):
        return self.b * self.N

    @property
    def delta_tilde(self):
        return self.law.delta / self.N

    @property
    def m1_tilde(self):
        return self.law.m1 / self.N

    @property
    def m2_tilde(self):
        return self.law.m2 / self.N ** 2

    @property
    def bm1(self):
        """Transport drift b*m1 = b_tilde*m1_tilde."""
        return self.b * self.law.m1

    def g_tilde_pdf(self, x):
        return self.N * self.law.pdf(self.N * np.asarray(x, dtype=float))

    def G_tilde(self, x):
        return self.law.cdf(self.N * np.asarray(x, dtype=float))

    def sample_tilde(self, rng, size=None):
        return self.law.sample(rng, size) / self.N


@dataclass(frozen=True)
class ErlangLaw:
    """Erlang distribution with integer shape and rate beta.

    density  h(x) = beta^shape * x^(shape-1) * exp(-beta*x) / (shape-1)!
    """

    shape: int
    rate: float

    def __post_init__(self):
        if int(self.shape) != self.shape or self.shape < 1:
            raise ValueError("shape must be a positive integer")
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        object.__setattr__(self, "shape", int(self.shape))
        object.__setattr__(self, "rate", float(self.rate))

    @property
    def mean(self):
        return self.shape / self.rate

    @property
    def variance(self):
        return self.shape / self.rate ** 2

    @property
    def cv(self):
        """Coefficient of variation, 1/sqrt(shape)."""
        return 1.0 / math.sqrt(self.shape)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 0.0)
        c = self.rate ** self.shape / math.factorial(self.shape - 1)
        out = np.where(x >= 0, c * xp ** (self.shape - 1) * np.exp(-self.rate * xp), 0.0)
        return float(out) if out.ndim == 0 else out

    def _poly_exp(self, x, coeffs):
        # sum of c_p * x^p * exp(-rate*x) with powers >= 0 only where c_p != 0
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for p, c in coeffs:
            if c != 0.0:
                acc = acc + c * x ** p
        res = acc * np.exp(-self.rate * x)
        return res if res.ndim else float(res)

    def pdf_deriv1(self, x):
        """First derivative of the density, finite at x = 0 for every shape."""
        l, b = self.shape, self.rate
        c = b ** l / math.factorial(l - 1)
        coeffs = [(l - 1, -c * b)]
        if l >= 2:
            coeffs.append((l - 2, c * (l - 1)))
        return self._poly_exp(x, coeffs)

    def pdf_deriv2(self, x):
        """Second derivative of the density."""
        l, b = self.shape, self.rate
        c = b ** l / math.factorial(l - 1)
        coeffs = [(l - 1, c * b * b)]
        if l >= 2:
            coeffs.append((l - 2, -2.0 * c * b * (l - 1)))
        if l >= 3:
            coeffs.append((l - 3, c * (l - 1) * (l - 2)))
        return self._poly_exp(x, coeffs)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = special.gammainc(self.shape, self.rate * np.maximum(x, 0.0))
        return float(out) if out.ndim == 0 else out

    def sf(self, x):
        """Survival function 1 - H(x) via the upper regularised gamma."""
        x = np.asarray(x, dtype=float)
        out = special.gammaincc(self.shape, self.rate * np.maximum(x, 0.0))
        return float(out) if out.ndim == 0 else out

    def quantile(self, p, tol=1e-12):
        """Inverse CDF by bracketing plus Newton with bisection fallback."""
        if not 0.0 < p < 1.0:
            raise ValueError("quantile requires p in (0, 1)")
        lo, hi = 0.0, max(self.mean, 1.0 / self.rate)
        while self.cdf(hi) < p:
            lo, hi = hi, hi * 2.0
            if hi > 1e12 / self.rate:
                raise RuntimeError("quantile bracket failed to close")
        x = 0.5 * (lo + hi)
        for _ in range(200):
            f = self.cdf(x) - p
            if f > 0:
                hi = x
            else:
                lo = x
            d = self.pdf(x)
            if d > 0:
                step = f / d
                x_new = x - step
                if not (lo < x_new < hi):
                    x_new = 0.5 * (lo + hi)
            else:
                x_new = 0.5 * (lo + hi)
            if abs(x_new - x) < tol:
                return x_new
            x = x_new
        return x

    def sample(self, rng, size=None):
        return rng.gamma(self.shape, 1.0 / self.rate, size)


def erlang_from_cv(cv):
    """Erlang law with mean 1 and the requested coefficient of variation.

    Only cv with integer 1/cv^2 are representable in the Erlang family.
    """
    shape = 1.0 / (cv * cv)
    if abs(shape - round(shape)) > 1e-9:
        raise ValueError(f"1/cv^2 = {shape} is not an integer")
    shape = int(round(shape))
    return ErlangLaw(shape, float(shape))


def second_derivative_l2_norm(law: ErlangLaw):
    """L2 norm of the second derivative of an Erlang density on [0, inf)."""
    val, _ = integrate.quad(
        lambda x: law.pdf_deriv2(x) ** 2,
        0.0,
        np.inf,
        epsrel=1e-8,
        limit=200,
    )
    return math.sqrt(val)


def verification_grid(lam, n=VERIFICATION_GRID_SIZE):
    """Geometric grid on (0, x_max] with x_max = 32/lam, plus the origin."""
    x_max = TAIL_CUTOFF_EXPONENT / lam
    return np.concatenate([[0.0], np.geomspace(x_max * 1e-6, x_max, n - 1)])


@dataclass(frozen=True)
class InitialDistribution:
    """Initial telomere-length density with fitted exponential tail envelopes.

    Stores the constants of the two-sided exponential controls:

        |n0''(x)| <= C_lam * exp(-lam*x)        |n0'(x)| <= Cprime_lam * exp(-lam*x)
        n0(x)     <= D_lam * lam * exp(-lam*x)
        n0(x)     >= D_omega * f(x) * exp(-omega*x) / int f*exp(-omega*.)

    with f(x) = x^(shape-1) for Erlang laws.  Tabulated densities carry no
    verified lower envelope (``D_omega`` is None and ``h4_verified`` False).
    """

    form: object
    lam: float
    C_lam: float
    Cprime_lam: float
    D_lam: float
    omega: float
    D_omega: float | None
    h4_verified: bool = field(default=False)

    def pdf(self, x):
        return self.form.pdf(x)

    def sf(self, x):
        return self.form.sf(x)

    def pdf_deriv1(self, x):
        return self.form.pdf_deriv1(x)

    def pdf_deriv2(self, x):
        return self.form.pdf_deriv2(x)

    def sample(self, rng, size=None):
        return self.form.sample(rng, size)

    @property
    def is_erlang(self):
        return isinstance(self.form, ErlangLaw)

    @property
    def erlang(self):
        if not self.is_erlang:
            raise UnsupportedLawError("initial distribution is not Erlang")
        return self.form


class _TabulatedDensity:
    """Density on a uniform grid; derivatives by centred differences."""

    def __init__(self, x, values):
        x = np.asarray(x, dtype=float)
        values = np.asarray(values, dtype=float)
        if x.ndim != 1 or x.shape != values.shape or x.size < 5:
            raise ValueError("need matching 1-d arrays with at least 5 nodes")
        steps = np.diff(x)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-8):
            raise ValueError("grid must be uniform and increasing")
        mass = np.trapezoid(values, x)
        if abs(mass - 1.0) > 1e-4:
            raise ValueError(f"tabulated density mass {mass:.8f} is not 1")
        self.x = x
        self.values = values / mass
        self._d1 = np.gradient(self.values, x)
        self._d2 = np.gradient(self._d1, x)
        sf = 1.0 - integrate.cumulative_trapezoid(self.values, x, initial=0.0)
        self._sf = np.maximum(sf, 0.0)

    def pdf(self, x):
        return np.interp(x, self.x, self.values, left=0.0, right=0.0)

    def sf(self, x):
        return np.interp(x, self.x, self._sf, left=1.0, right=0.0)

    def pdf_deriv1(self, x):
        return np.interp(x, self.x, self._d1, left=0.0, right=0.0)

    def pdf_deriv2(self, x):
        return np.interp(x, self.x, self._d2, left=0.0, right=0.0)

    def sample(self, rng, size=None):
        u = rng.uniform(0.0, 1.0, size)
        return np.interp(u, 1.0 - self._sf, self.x)


def fit_tail_constants(form, lam, omega=None):
    """Fit the tail-envelope constants of an initial density.

    ``form`` is an :class:`ErlangLaw` or a ``(grid, values)`` pair.  Suprema
    are taken on the geometric verification grid; for Erlang the derivatives
    are analytic and the lower-envelope constant is (rate/omega)^shape.
    """
    if isinstance(form, tuple):
        form = _TabulatedDensity(*form)

    if isinstance(form, ErlangLaw):
        if lam >= form.rate:
            raise InfeasibleError(
                f"lam = {lam} must be below the Erlang rate {form.rate}"
            )
        if omega is None:
            omega = form.rate
        if omega < form.rate:
            raise InfeasibleError(
                f"omega = {omega} below the Erlang rate leaves the lower "
                "envelope unsatisfiable with f(x) = x^(shape-1)"
            )
    elif omega is None:
        omega = lam
    if lam <= 0 or omega < lam:
        raise ValueError("need 0 < lam <= omega")

    grid = verification_grid(lam)
    weight = np.exp(lam * grid)
    C_lam = float(np.max(np.abs(form.pdf_deriv2(grid)) * weight))
    Cprime_lam = float(np.max(np.abs(form.pdf_deriv1(grid)) * weight))
    D_lam = float(np.max(form.pdf(grid) * weight) / lam)
    for name, value in (("C_lam", C_lam), ("Cprime_lam", Cprime_lam), ("D_lam", D_lam)):
        if not np.isfinite(value):
            raise InfeasibleError(f"{name} is not finite for lam = {lam}")
    D_lam = max(D_lam, 1.0)

    if isinstance(form, ErlangLaw):
        D_omega = (form.rate / omega) ** form.shape
        _verify_envelopes(form, grid, lam, C_lam, Cprime_lam, D_lam, omega, D_omega)
        return InitialDistribution(
            form, lam, C_lam, Cprime_lam, D_lam, omega, D_omega, h4_verified=True
        )
    # No principled lower-envelope shape is available for tabulated data;
    # record the upper envelopes only.
    _verify_envelopes(form, grid, lam, C_lam, Cprime_lam, D_lam, None, None)
    return InitialDistribution(
        form, lam, C_lam, Cprime_lam, D_lam, omega, None, h4_verified=False
    )


def _verify_envelopes(form, grid, lam, C_lam, Cprime_lam, D_lam, omega, D_omega):
    slack = 1.0 + 1e-9
    env = np.exp(-lam * grid)
    if np.any(np.abs(form.pdf_deriv2(grid)) > slack * C_lam * env):
        raise InfeasibleError("second-derivative envelope violated on grid")
    if np.any(np.abs(form.pdf_deriv1(grid)) > slack * Cprime_lam * env):
        raise InfeasibleError("first-derivative envelope violated on grid")
    if np.any(form.pdf(grid) > slack * D_lam * lam * env):
        raise InfeasibleError("upper density envelope violated on grid")
    if D_omega is not None:
        shape = form.shape
        norm = math.gamma(shape) / omega ** shape
        lower = D_omega * grid ** (shape - 1) * np.exp(-omega * grid) / norm
        if np.any(form.pdf(grid) * slack < lower - 1e-300):
            raise InfeasibleError("lower density envelope violated on grid")


def initial_from_erlang(erlang: ErlangLaw, lam=None, omega=None):
    """Initial distribution from an Erlang law; defaults lam = rate/2, omega = rate."""
    if lam is None:
        lam = erlang.rate / 2.0
    return fit_tail_constants(erlang, lam, omega)


def initial_from_table(x, values, lam, omega=None):
    """Initial distribution from tabulated density samples on a uniform grid."""
    return fit_tail_constants((x, values), lam, omega)
