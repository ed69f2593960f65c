"""Closed-form solutions and the independent grid oracle.

Transport (large-N) approximants solved by characteristics, the explicit
exponential-case solution, the Bell-polynomial solution of the one-telomere
jump equation for Erlang initial data, and a method-of-lines solver for the
rescaled one-telomere system used as a cross-checking oracle.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .distributions import ErlangLaw, InitialDistribution, ScaledParams
from .errors import CapacityError, ConfigError, UnsupportedLawError

BELL_MAX_SHAPE = 12


@dataclass(frozen=True)
class DensityCurve:
    """Real function sampled on a uniform grid of the half-line."""

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != values.shape or x.size < 2:
            raise ValueError("need matching 1-d arrays with at least 2 nodes")
        steps = np.diff(x)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9):
            raise ValueError("grid must be uniform and strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("curve values must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", values)

    @property
    def dx(self):
        return float(self.x[1] - self.x[0])

    def mass(self):
        return float(np.trapezoid(self.values, self.x))

    def __call__(self, xq):
        return np.interp(xq, self.x, self.values)

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x", "value"])
            for xi, vi in zip(self.x, self.values):
                writer.writerow([format(float(xi), ".17g"), format(float(vi), ".17g")])


class TransportSolution:
    """Characteristics solution of the transport approximants.

    One-telomere: advection toward 0 at speed b*m1 with boundary absorption;
    2k-telomere: speed b*m1/2 per coordinate.
    """

    def __init__(self, n0: InitialDistribution, params: ScaledParams, k=None):
        if k is not None and (int(k) != k or k < 1):
            raise ValueError("k must be a positive integer or None")
        self.n0 = n0
        self.params = params
        self.k = None if k is None else int(k)

    @property
    def drift(self):
        """Advection speed per coordinate."""
        bm1 = self.params.bm1
        return bm1 if self.k is None else bm1 / 2.0

    def u1(self, t, x):
        """u(t, x) = n0(b*m1*t + x)."""
        return self.n0.pdf(self.params.bm1 * t + np.asarray(x, dtype=float))

    def u1_boundary(self, t):
        """Senescence-time density of the transport limit, b*m1*n0(b*m1*t)."""
        bm1 = self.params.bm1
        return bm1 * self.n0.pdf(bm1 * np.asarray(t, dtype=float))

    def u2k(self, t, x):
        """Product solution at a point x of R_+^{2k}."""
        if self.k is None:
            raise ValueError("u2k requires a chromosome count")
        x = np.asarray(x, dtype=float)
        return float(np.prod(self.n0.pdf(self.params.bm1 * t / 2.0 + x)))

    def u2k_boundary(self, t):
        """k*b*m1*n0(b*m1*t/2) * [survival at b*m1*t/2]^(2k-1)."""
        if self.k is None:
            raise ValueError("u2k_boundary requires a chromosome count")
        bm1 = self.params.bm1
        y = bm1 * np.asarray(t, dtype=float) / 2.0
        return self.k * bm1 * self.n0.pdf(y) * self.n0.sf(y) ** (2 * self.k - 1)

    def u2k_tail(self, t):
        """Tail mass of the boundary flux: [survival at b*m1*t/2]^(2k)."""
        if self.k is None:
            raise ValueError("u2k_tail requires a chromosome count")
        y = self.params.bm1 * np.asarray(t, dtype=float) / 2.0
        return self.n0.sf(y) ** (2 * self.k)


def beta_approx(params: ScaledParams, beta, k=None):
    """Decay-rate approximation of beta at finite N.

    d = 1:  (N/m1) * (1 - laplace_g(beta/N))
    d = 2k: (N/(k*m1)) * (1 - laplace_g(beta/N)^k)
    """
    lg = float(params.law.laplace(beta / params.N))
    if k is None:
        return params.N / params.law.m1 * (1.0 - lg)
    return params.N / (k * params.law.m1) * (1.0 - lg ** k)


@dataclass(frozen=True)
class ExponentialCase:
    """Closed forms when the initial distribution is exponential, n0 = h(1, beta).

    The jump model then stays exponential in space for all time, the
    senescence-time density is Exp(rate) with rate = k*b*m1*beta_N, and the
    resulting noise-free estimator is beta_N * exp(-beta_N * x).
    """

    params: ScaledParams
    beta: float
    k: int | None
    beta_N: float

    @property
    def rate(self):
        kk = 1 if self.k is None else self.k
        return kk * self.params.bm1 * self.beta_N

    def boundary(self, t):
        return self.rate * np.exp(-self.rate * np.asarray(t, dtype=float))

    def tail(self, t):
        return np.exp(-self.rate * np.asarray(t, dtype=float))

    def estimator(self, x):
        return self.beta_N * np.exp(-self.beta_N * np.asarray(x, dtype=float))


def explicit_exponential_case(params: ScaledParams, n0, k=None):
    """Closed-form solution objects for exponential initial data."""
    form = n0.form if isinstance(n0, InitialDistribution) else n0
    if not (isinstance(form, ErlangLaw) and form.shape == 1):
        raise UnsupportedLawError("explicit exponential case requires n0 = h(1, beta)")
    beta = form.rate
    return ExponentialCase(params, beta, k, beta_approx(params, beta, k))


def bell_polynomial(coeffs):
    """Complete Bell polynomial B_m(a_1, ..., a_m) with m = len(coeffs).

    Recurrence B_{m+1} = sum_j C(m, j) B_{m-j} a_{j+1}, B_0 = 1.  Accepts
    numpy arrays as coefficients and evaluates elementwise.
    """
    coeffs = list(coeffs)
    m = len(coeffs)
    B = [1.0]
    for mm in range(m):
        acc = 0.0
        for j in range(mm + 1):
            acc = acc + math.comb(mm, j) * np.asarray(B[mm - j]) * coeffs[j]
        B.append(acc)
    out = np.asarray(B[m], dtype=float)
    return float(out) if out.ndim == 0 else out


def _psi_and_derivs(params: ScaledParams, alpha, t, x, n_derivs):
    """psi(alpha) = -b*N*(1 - laplace_g(alpha/N))*t - alpha*x and its
    alpha-derivatives up to order n_derivs (x is scalar or array)."""
    b, N, law = params.b, params.N, params.law
    s = alpha / N
    x = np.asarray(x, dtype=float)
    psi = -b * N * (1.0 - float(law.laplace(s))) * t - alpha * x
    derivs = []
    for j in range(1, n_derivs + 1):
        dj = b * N ** (1 - j) * law.laplace_deriv(s, j) * t
        if j == 1:
            dj = dj - x
        else:
            dj = dj + np.zeros_like(x)
        derivs.append(dj)
    return psi, derivs


def erlang_explicit_n1(params: ScaledParams, erlang: ErlangLaw, t, x):
    """Exact one-telomere density for Erlang initial data.

    Evaluates the Bell-polynomial representation
    (-1)^(l-1) beta^l/(l-1)! * B_{l-1}(psi', ..., psi^(l-1)) * exp(psi)
    at alpha = beta.  Vectorised over x; capped at shape 12, beyond which the
    factorial/derivative conditioning degrades.
    """
    if erlang.shape > BELL_MAX_SHAPE:
        raise CapacityError(
            f"explicit Erlang solution capped at shape {BELL_MAX_SHAPE}; "
            "use the grid oracle instead"
        )
    l, beta = erlang.shape, erlang.rate
    psi, derivs = _psi_and_derivs(params, beta, t, x, l - 1)
    prefactor = (-1.0) ** (l - 1) * beta ** l / math.factorial(l - 1)
    out = np.asarray(prefactor * bell_polynomial(derivs) * np.exp(psi), dtype=float)
    return float(out) if out.ndim == 0 else out


def erlang_explicit_boundary(params: ScaledParams, erlang: ErlangLaw, t, order=64):
    """Senescence-time density of the exact one-telomere solution.

    n_boundary(t) = b * int_0^delta n1(t, v/N) (1 - G(v)) dv, by fixed
    Gauss-Legendre quadrature (the integrand is smooth in v).
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    delta = params.law.delta
    v = 0.5 * delta * (nodes + 1.0)
    w = 0.5 * delta * weights
    vals = erlang_explicit_n1(params, erlang, t, v / params.N)
    oneG = 1.0 - np.asarray(params.law.cdf(v))
    return params.b * float(np.sum(w * oneG * vals))


@dataclass(frozen=True)
class GridOracleResult:
    """Output of the method-of-lines run: flux series, mass audit, snapshots."""

    x: np.ndarray
    times: np.ndarray
    flux: np.ndarray
    mass: np.ndarray
    snapshots: dict
    final: DensityCurve

    def flux_at(self, t):
        return np.interp(t, self.times, self.flux)

    def mass_at(self, t):
        return np.interp(t, self.times, self.mass)


def grid_oracle_n1(
    params: ScaledParams,
    n0,
    t_max,
    x_max,
    dx=None,
    dt=None,
    snapshot_times=(),
):
    """Method-of-lines solution of the rescaled one-telomere system.

    Solves d/dt n(x) = b_tilde * [int_0^delta_tilde n(x+v) g_tilde(v) dv - n(x)]
    with trapezoid quadrature for the nonlocal term and classical fourth-order
    time stepping.  The grid extends delta_tilde beyond x_max; values past the
    far end are closed with the initial tail n0, whose contribution is of the
    order n0(x_max) and is driven below tolerance by choosing x_max large
    enough.  The boundary flux is b_tilde * int n(t, y)(1 - G_tilde(y)) dy.

    Stability limits: dx <= delta_tilde/8 and dt <= 0.1/b_tilde (defaults
    delta_tilde/16 and 0.05/b_tilde).
    """
    b_tilde = params.b_tilde
    delta_tilde = params.delta_tilde
    if dx is None:
        dx = delta_tilde / 16.0
    if dt is None:
        dt = 0.05 / b_tilde
    if dx > delta_tilde / 8.0 * (1.0 + 1e-12):
        raise ConfigError(f"dx = {dx} violates the dx <= delta_tilde/8 limit")
    if dt > 0.1 / b_tilde * (1.0 + 1e-12):
        raise ConfigError(f"dt = {dt} violates the dt <= 0.1/b_tilde limit")

    # snap dx to an exact divisor of delta_tilde so quadrature nodes align
    J = max(8, int(round(delta_tilde / dx)))
    dx = delta_tilde / J
    M = int(math.ceil((x_max + delta_tilde) / dx)) + 1
    xs = np.arange(M) * dx

    nodes = xs[: J + 1]
    trap = np.full(J + 1, dx)
    trap[0] *= 0.5
    trap[-1] *= 0.5
    w_conv = trap * np.asarray(params.g_tilde_pdf(nodes), dtype=float)
    w_flux = trap * (1.0 - np.asarray(params.G_tilde(nodes), dtype=float))

    n = np.asarray(n0.pdf(xs), dtype=float)
    pad = np.asarray(n0.pdf(xs[-1] + dx * np.arange(1, J + 1)), dtype=float)

    def rhs(v):
        ve = np.concatenate([v, pad])
        conv = np.zeros(M)
        for j in range(J + 1):
            conv += w_conv[j] * ve[j : j + M]
        return b_tilde * (conv - v)

    def flux_of(v):
        return b_tilde * float(w_flux @ v[: J + 1])

    n_steps = max(1, int(math.ceil(t_max / dt)))
    dt = t_max / n_steps
    times = np.arange(n_steps + 1) * dt
    flux = np.empty(n_steps + 1)
    mass = np.empty(n_steps + 1)
    flux[0] = flux_of(n)
    absorbed = 0.0
    mass[0] = float(np.trapezoid(n, xs))

    snap_steps = {}
    for t_req in snapshot_times:
        step = int(round(t_req / dt))
        if not 0 <= step <= n_steps:
            raise ConfigError(f"snapshot time {t_req} outside [0, {t_max}]")
        snap_steps[step] = float(times[step])
    snapshots = {}
    if 0 in snap_steps:
        snapshots[snap_steps[0]] = DensityCurve(xs.copy(), n.copy())

    for step in range(1, n_steps + 1):
        k1 = rhs(n)
        k2 = rhs(n + 0.5 * dt * k1)
        k3 = rhs(n + 0.5 * dt * k2)
        k4 = rhs(n + dt * k3)
        n = n + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        flux[step] = flux_of(n)
        absorbed += 0.5 * dt * (flux[step - 1] + flux[step])
        mass[step] = float(np.trapezoid(n, xs)) + absorbed
        if step in snap_steps:
            snapshots[snap_steps[step]] = DensityCurve(xs.copy(), n.copy())

    return GridOracleResult(xs, times, flux, mass, snapshots, DensityCurve(xs, n))
