"""Theoretical constants and error bounds.

Assembles explicit sufficient values for the constants that the theory only
asserts to exist, by composing the displayed intermediate inequalities.  All
bounds produced here are sufficient, not sharp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import beta_approx
from .distributions import ErlangLaw, InitialDistribution, ScaledParams
from .errors import InfeasibleError


def decay_rate_approx(params: ScaledParams, lam):
    """lambda_N = (N/m1) * (1 - laplace_g(lam/N)); increases to lam as N grows."""
    return beta_approx(params, lam, k=None)


def decay_rate_approx_2k(params: ScaledParams, lam, k):
    """lambda'_N = (N/(k*m1)) * (1 - laplace_g(lam/N)^k); below lambda_N."""
    return beta_approx(params, lam, k=k)


def _sup_quadratic_exp(a, c2, c1):
    """max over x >= 0 of (c2*x^2 + c1*x) * exp(-a*x), for a, c1, c2 > 0."""
    if a <= 0:
        return math.inf
    # stationarity: a*c2*x^2 + (a*c1 - 2*c2)*x - c1 = 0, take the positive root
    disc = (a * c1 - 2.0 * c2) ** 2 + 4.0 * a * c2 * c1
    x_star = ((2.0 * c2 - a * c1) + math.sqrt(disc)) / (2.0 * a * c2)
    return (c2 * x_star * x_star + c1 * x_star) * math.exp(-a * x_star)


@dataclass(frozen=True)
class BoundContext:
    """Everything needed to evaluate the estimation-error bounds.

    The constants c1 and d1 are assembled from the proof chain:

        c'0 = C_lam*m2/2                     (length-density approximation)
        c'1 = m2*max(C_lam, C'_lam)/2        (boundary-flux approximation)
        c1  = c'1/m1                         (one-telomere estimator)
        d'0 = m2*max(C'_lam^2, C_lam*lam*D_lam) / (lam*D_lam)^2
        dt  = 4*lam^2*max(m1*delta/2, delta^2)   (several short telomeres)
        d'1 = max(d'0*lam, dt, C'_lam*m2/2)
        d1  = (d'1*D_omega + d'0*lam*D_lam)/m1

    These are sufficient values, not sharp ones.
    """

    params: ScaledParams
    n0: InitialDistribution
    k: int | None = None

    @property
    def lam_N(self):
        return decay_rate_approx(self.params, self.n0.lam)

    @property
    def lam_prime_N(self):
        if self.k is None:
            raise ValueError("lambda'_N requires a chromosome count")
        return decay_rate_approx_2k(self.params, self.n0.lam, self.k)

    @property
    def beta_prime_N(self):
        """(2k+1)*lambda'_N - 2k*omega; the norm bounds need this positive."""
        if self.k is None:
            raise ValueError("beta'_N requires a chromosome count")
        return (2 * self.k + 1) * self.lam_prime_N - 2 * self.k * self.n0.omega

    @property
    def c_prime0(self):
        return self.n0.C_lam * self.params.law.m2 / 2.0

    @property
    def c_prime1(self):
        return self.params.law.m2 * max(self.n0.C_lam, self.n0.Cprime_lam) / 2.0

    @property
    def c1(self):
        return self.c_prime1 / self.params.law.m1

    @property
    def d_prime0(self):
        n0, law = self.n0, self.params.law
        top = max(n0.Cprime_lam ** 2, n0.C_lam * n0.lam * n0.D_lam)
        return law.m2 * top / (n0.lam * n0.D_lam) ** 2

    @property
    def d_tilde(self):
        law = self.params.law
        return 4.0 * self.n0.lam ** 2 * max(law.m1 * law.delta / 2.0, law.delta ** 2)

    @property
    def d_prime1(self):
        return max(
            self.d_prime0 * self.n0.lam,
            self.d_tilde,
            self.n0.Cprime_lam * self.params.law.m2 / 2.0,
        )

    @property
    def d1(self):
        n0 = self.n0
        if n0.D_omega is None:
            raise InfeasibleError("d1 needs a verified lower tail envelope")
        return (
            self.d_prime1 * n0.D_omega + self.d_prime0 * n0.lam * n0.D_lam
        ) / self.params.law.m1

    @property
    def envelope_ratio_2k(self):
        """(D_lam / D_omega)^(2k)."""
        if self.k is None:
            raise ValueError("requires a chromosome count")
        if self.n0.D_omega is None:
            raise InfeasibleError("needs a verified lower tail envelope")
        return (self.n0.D_lam / self.n0.D_omega) ** (2 * self.k)

    @property
    def L_1N(self):
        """Weighted-sup model bias constant, c1 * sup x(x+1)exp(-lambda_N x)."""
        return self.c1 * _sup_quadratic_exp(self.lam_N, 1.0, 1.0)

    @property
    def L_2kN(self):
        """2k analogue; infinite when beta'_N <= 0 (no exponential decay)."""
        if self.beta_prime_N <= 0:
            return math.inf
        k = self.k
        sup = _sup_quadratic_exp(self.beta_prime_N, float(k * k), float(k + 1))
        return self.d1 * self.envelope_ratio_2k * sup


def pointwise_error_bound_1(ctx: BoundContext, x):
    """Pointwise one-telomere estimation error bound (c1/N)(x+1)e^{-lambda_N x}."""
    x = np.asarray(x, dtype=float)
    return ctx.c1 / ctx.params.N * (x + 1.0) * np.exp(-ctx.lam_N * x)


def pointwise_error_bound_2k(ctx: BoundContext, x):
    """Pointwise 2k estimation error bound.

    (d1/N)(D_lam/D_omega)^{2k} (k^2 x + k + 1) e^{-(2k+1)lambda'_N x + 2k omega x};
    grows without bound when (2k+1)*lambda'_N <= 2k*omega.
    """
    if ctx.k is None:
        raise ValueError("pointwise_error_bound_2k requires a chromosome count")
    x = np.asarray(x, dtype=float)
    k = ctx.k
    return (
        ctx.d1
        / ctx.params.N
        * ctx.envelope_ratio_2k
        * (k * k * x + k + 1.0)
        * np.exp(-ctx.beta_prime_N * x)
    )


def lp_error_bound(ctx: BoundContext, p, dimension="1"):
    """Estimation-error bound in the Lebesgue L^p norm, p > 0.

    The 2k variant requires beta'_N > 0; otherwise the pointwise errors grow
    exponentially and no bound in norm exists.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    gamma_term = math.exp(math.lgamma(p + 1.0) / p)
    if dimension == "1":
        a = ctx.lam_N
        return ctx.c1 / ctx.params.N * (
            gamma_term / (a * p) ** (1.0 + 1.0 / p) + 1.0 / (a * p) ** (1.0 / p)
        )
    if dimension != "2k":
        raise ValueError("dimension must be '1' or '2k'")
    if ctx.k is None:
        raise ValueError("the 2k bound requires a chromosome count")
    a = ctx.beta_prime_N
    if a <= 0:
        raise InfeasibleError(
            "the L^p bound requires beta'_N = (2k+1)lambda'_N - 2k*omega > 0; "
            f"got {a:g} (no exponential decay)"
        )
    k = ctx.k
    return (
        ctx.d1
        / ctx.params.N
        * ctx.envelope_ratio_2k
        * (
            k * k * gamma_term / (a * p) ** (1.0 + 1.0 / p)
            + (k + 1.0) / (a * p) ** (1.0 / p)
        )
    )


def dkw_radius(n_s, p, k=None):
    """Dvoretzky-Kiefer-Wolfowitz confidence radius.

    Solves 2*exp(-2*n_s*eps^2) = p: eps = sqrt(log(2/p)/(2*n_s)).  The 2k
    variant returns (log(2/p)/(2*n_s))^(1/(4k)), the radius entering the
    survival-power estimator analysis.
    """
    if n_s < 1:
        raise ValueError("n_s must be >= 1")
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    base = math.log(2.0 / p) / (2.0 * n_s)
    if k is None:
        return math.sqrt(base)
    return base ** (1.0 / (4.0 * k))


def weibull_limit_cdf(shape, x):
    """Limit law of the scaled minimum: 1 - exp(-x^shape) on x >= 0."""
    x = np.asarray(x, dtype=float)
    out = -np.expm1(-np.maximum(x, 0.0) ** shape)
    return float(out) if out.ndim == 0 else out


def weibull_scale(shape, rate, k):
    """Scaling constant of the minimum of 2k Erlang draws: H^{-1}(1/(2k))."""
    return ErlangLaw(shape, rate).quantile(1.0 / (2.0 * k))


def confidence_bound(ctx: BoundContext, c_hat, p, n_s, dimension="1"):
    """Probability-(1-p) bound on the weighted sup error of the smoothed estimator.

    2*sqrt(2/pi)*c_hat^(1/2)*(log(2/p)/(2 n_s))^q + L_{d,N}/N with q = 1/4 for
    the one-telomere model and 1/(8k) otherwise.  The additive L term is the
    assembled (non-sharp) model-approximation constant.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    base = math.log(2.0 / p) / (2.0 * n_s)
    if dimension == "1":
        exponent, L = 0.25, ctx.L_1N
    elif dimension == "2k":
        if ctx.k is None:
            raise ValueError("the 2k bound requires a chromosome count")
        exponent, L = 1.0 / (8.0 * ctx.k), ctx.L_2kN
    else:
        raise ValueError("dimension must be '1' or '2k'")
    return 2.0 * math.sqrt(2.0 / math.pi) * math.sqrt(c_hat) * base ** exponent + (
        L / ctx.params.N
    )
