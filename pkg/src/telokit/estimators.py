"""Inverse-problem estimators for the initial telomere-length density.

Noise-free estimators invert exact boundary (senescence-time) densities via
the transport-limit characteristics; data-driven estimators smooth observed
senescence times with a log-transform Gaussian kernel, which respects the
positive support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularTailError

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Evaluation chunk bounding the (n_grid x n_samples) kernel matrices.
_CHUNK = 4_000_000


def _gauss(u):
    return np.exp(-0.5 * u * u) / _SQRT_2PI


def _chunked_kernel_sum(log_x, log_t, alpha, weights):
    # sum_i w_i * rho((log_x - log_t_i)/alpha), chunked over the grid to keep
    # the kernel matrix below _CHUNK elements
    out = np.empty(log_x.size)
    step = max(1, _CHUNK // max(1, log_t.size))
    for i in range(0, log_x.size, step):
        u = (log_x[i : i + step, None] - log_t[None, :]) / alpha
        out[i : i + step] = _gauss(u) @ weights
    return out


def hat_n0_1(boundary, bm1, x):
    """Noise-free one-telomere estimator: boundary(x/(b*m1)) / (b*m1).

    ``boundary`` is a callable senescence-time density.  For senescence-time
    samples use :func:`bar_n0_1` instead.
    """
    if not callable(boundary):
        raise TypeError("hat_n0_1 needs an analytic boundary density; "
                        "for samples use bar_n0_1")
    x = np.asarray(x, dtype=float)
    return np.asarray(boundary(x / bm1)) / bm1


def hat_n0_2k(boundary, tail, bm1, k, x):
    """Noise-free 2k-telomere estimator.

    boundary(2x/(b*m1)) / (k*b*m1 * tail(2x/(b*m1))^(1 - 1/(2k))),
    where ``tail`` is the boundary survival integral.
    """
    if not callable(boundary) or not callable(tail):
        raise TypeError("hat_n0_2k needs analytic boundary and tail callables; "
                        "for samples use bar_n0_2k")
    x = np.asarray(x, dtype=float)
    t = 2.0 * np.atleast_1d(x) / bm1
    tails = np.atleast_1d(np.asarray(tail(t), dtype=float))
    bad = tails <= 0.0
    if np.any(bad):
        safe = np.atleast_1d(x)[~bad]
        largest = float(safe.max()) if safe.size else 0.0
        raise SingularTailError(
            f"boundary tail vanishes inside the range; largest safe x is {largest:g}",
            largest_safe_x=largest,
        )
    out = np.asarray(boundary(t)) / (k * bm1 * tails ** (1.0 - 1.0 / (2 * k)))
    return float(out[0]) if x.ndim == 0 else out


def bar_n0_1(times, bm1, alpha, x):
    """Log-transform kernel density estimator from one-telomere samples.

    (1/n_s) * sum_i (x*alpha)^-1 * rho(log(x / (b*m1*T_i)) / alpha) with rho
    the standard Gaussian density.  Requires x > 0.
    """
    times = np.asarray(times, dtype=float)
    x = np.asarray(x, dtype=float)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if np.any(x <= 0):
        raise ValueError("log-domain estimator requires x > 0")
    xs = np.atleast_1d(x)
    log_t = np.log(bm1 * times)
    res = _chunked_kernel_sum(np.log(xs), log_t, alpha, np.full(times.size, 1.0 / times.size))
    res /= alpha * xs
    return float(res[0]) if x.ndim == 0 else res


def _dedupe_times(times_sorted):
    # CSV rounding can produce exact duplicates; nudge them apart by one ulp
    # so the logarithmic kernel arguments stay distinct.
    out = times_sorted.copy()
    for i in range(1, out.size):
        if out[i] <= out[i - 1]:
            out[i] = np.nextafter(out[i - 1], np.inf)
    return out


def _survival_power_weights(n_s, k):
    # (1 - (i-1)/n_s)^(1/2k) - (1 - i/n_s)^(1/2k) for i = 1..n_s: collapsing
    # the telescoping sum over the sentinel-augmented sample removes the two
    # formally infinite kernel arguments, which contribute exact zeros.
    j = np.arange(n_s + 1, dtype=float)
    pow_ = (1.0 - j / n_s) ** (1.0 / (2 * k))
    return pow_[:-1] - pow_[1:]


def bar_n0_2k(times, bm1, k, alpha, x):
    """Smoothed survival-power estimator from 2k-telomere samples.

    Smooths the weak derivative of -[empirical survival]^(1/2k) composed with
    t = 2x/(b*m1): a log-Gaussian kernel sum with survival-power weights.
    Sample order does not matter; sorting is internal.
    """
    times = np.sort(np.asarray(times, dtype=float))
    times = _dedupe_times(times)
    x = np.asarray(x, dtype=float)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if np.any(x <= 0):
        raise ValueError("log-domain estimator requires x > 0")
    xs = np.atleast_1d(x)
    weights = _survival_power_weights(times.size, k)
    res = _chunked_kernel_sum(np.log(2.0 * xs / bm1), np.log(times), alpha, weights)
    res /= alpha * xs
    return float(res[0]) if x.ndim == 0 else res


def c_hat_from_curve(x, values):
    """Roughness constant sup |x^2 f'(x) + x f(x)| from sampled values.

    Centred differences at the grid spacing; this is the constant entering
    the confidence-interval smoothing rule.
    """
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    deriv = np.gradient(values, x)
    return float(np.max(np.abs(x * x * deriv + x * values)))


def c_hat_kde_1(times, bm1, alpha, x):
    """Roughness constant of the smoothed estimator itself.

    The Gaussian kernel is differentiable, so x^2 bar' + x bar reduces to
    -(1/n_s) sum_i (u_i/alpha^2) rho(u_i) with u_i the log arguments.
    """
    times = np.asarray(times, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0):
        raise ValueError("requires x > 0")
    u = (np.log(x)[:, None] - np.log(bm1 * times)[None, :]) / alpha
    vals = (u * _gauss(u)).sum(axis=1) / (alpha * alpha * times.size)
    return float(np.max(np.abs(vals)))


def smoothing_alpha(c_hat, p, n_s, k=None):
    """Confidence-level smoothing parameter.

    d = 1:  alpha_p = C^(-1/2) * (log(2/p)/(2 n_s))^(1/4)
    d = 2k: exponent 1/(8k) instead of 1/4.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    if c_hat <= 0:
        raise ValueError("roughness constant must be positive")
    eps = math.log(2.0 / p) / (2.0 * n_s)
    exponent = 0.25 if k is None else 1.0 / (8.0 * k)
    return eps ** exponent / math.sqrt(c_hat)


@dataclass
class EstimationJob:
    """One estimator run: data, smoothing, model dimension and output grid."""

    params: object
    times: np.ndarray
    alpha: float
    x_grid: np.ndarray
    k: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        self.times = np.asarray(self.times, dtype=float)
        self.x_grid = np.asarray(self.x_grid, dtype=float)

    def estimate(self):
        """Density values of the sample-based estimator on the grid."""
        bm1 = self.params.bm1
        if self.k is None:
            return bar_n0_1(self.times, bm1, self.alpha, self.x_grid)
        return bar_n0_2k(self.times, bm1, self.k, self.alpha, self.x_grid)
