"""Figure recipes: the standard experiment plots, with their data as CSV.

Every recipe is deterministic (fixed seeds) and writes an SVG plus the
plotted curves in delimited form.
"""

from __future__ import annotations

import os

import numpy as np

from . import analytic, bounds, estimators, simulator
from .distributions import ErlangLaw, ScaledParams, UniformShortening, erlang_from_cv, initial_from_erlang
from .errors import ConfigError
from .report import histogram_figure, overlay_figure, write_csv

_UNIT_LAW = UniformShortening(0.0, 1.0)


def _params(N):
    return ScaledParams(b=1.0, N=N, law=_UNIT_LAW)


def _grid(x_max, n=400):
    return np.linspace(x_max / n, x_max, n)


def _noise_free_estimate_1(params, erlang, x):
    """Noise-free one-telomere estimate; Bell solution when available."""
    if erlang.shape == 1:
        return analytic.explicit_exponential_case(params, erlang).estimator(x)
    if erlang.shape <= analytic.BELL_MAX_SHAPE:
        flux = lambda t: np.array(
            [analytic.erlang_explicit_boundary(params, erlang, ti) for ti in np.atleast_1d(t)]
        )
        return estimators.hat_n0_1(flux, params.bm1, x)
    t_max = 1.2 * x.max() / params.bm1
    oracle = analytic.grid_oracle_n1(
        params, erlang, t_max=t_max, x_max=x.max() + params.bm1 * t_max + 1.0
    )
    return estimators.hat_n0_1(oracle.flux_at, params.bm1, x)


def fig_one_telo_n_sweep(outdir):
    """Noise-free estimates for N in {1, 5, 40}, n0 = h(1,4) and h(2,1.5)."""
    paths = []
    for erlang, tag in ((ErlangLaw(1, 4.0), "h1_4"), (ErlangLaw(2, 1.5), "h2_1.5")):
        x = _grid(3.0)
        curves = []
        for N in (1, 5, 40):
            est = _noise_free_estimate_1(_params(N), erlang, x)
            curves.append((f"N = {N}", est))
        truth = erlang.pdf(x)
        base = os.path.join(outdir, f"one-telo-N-sweep_{tag}")
        write_csv(
            base + ".csv",
            ["x"] + [f"estimate_N{N}" for N in (1, 5, 40)] + ["true_density"],
            [x] + [c[1] for c in curves] + [truth],
        )
        overlay_figure(
            base + ".svg", x, curves, truth,
            title=f"one-telomere estimates, n0 = Erlang({erlang.shape}, {erlang.rate:g})",
        )
        paths += [base + ".csv", base + ".svg"]
    return paths


def fig_cv_sweep(outdir):
    """Noise-free estimates for Erlang initial laws of decreasing variability."""
    params = _params(40)
    paths = []
    for cv_denom in (2, 3, 5, 7):
        erlang = erlang_from_cv(1.0 / cv_denom)
        x = _grid(2.5)
        est = _noise_free_estimate_1(params, erlang, x)
        truth = erlang.pdf(x)
        base = os.path.join(outdir, f"cv-sweep_cv1over{cv_denom}")
        write_csv(base + ".csv", ["x", "estimate", "true_density"], [x, est, truth])
        overlay_figure(
            base + ".svg", x, [("estimate (N = 40)", est)], truth,
            title=f"mean-1 Erlang with cv = 1/{cv_denom}",
        )
        paths += [base + ".csv", base + ".svg"]
    return paths


def _k_sweep(outdir, ks, tag):
    params = _params(40)
    erlang = ErlangLaw(1, 4.0)
    x = _grid(2.0)
    curves = []
    for k in ks:
        case = analytic.explicit_exponential_case(params, erlang, k=k)
        curves.append((f"k = {k}", case.estimator(x)))
    truth = erlang.pdf(x)
    base = os.path.join(outdir, tag)
    write_csv(
        base + ".csv",
        ["x"] + [f"estimate_k{k}" for k in ks] + ["true_density"],
        [x] + [c[1] for c in curves] + [truth],
    )
    overlay_figure(base + ".svg", x, curves, truth,
                   title=f"2k-telomere estimates, n0 = Erlang(1, 4), k in {list(ks)}")
    return [base + ".csv", base + ".svg"]


def fig_k_small(outdir):
    """Exponential-case 2k estimates for k in {1, 3, 5}."""
    return _k_sweep(outdir, (1, 3, 5), "k-small")


def fig_k_large(outdir):
    """Exponential-case 2k estimates for k in {15, 30, 50}."""
    return _k_sweep(outdir, (15, 30, 50), "k-large")


def fig_one_telo_ns_sweep(outdir):
    """Sample-based one-telomere estimates for n_s in {30, 300, 3000}."""
    params = _params(40)
    paths = []
    for erlang, tag, seed in ((ErlangLaw(1, 4.0), "h1_4", 101), (ErlangLaw(2, 1.5), "h2_1.5", 102)):
        n0 = initial_from_erlang(erlang)
        x = _grid(3.0 if erlang.shape == 1 else 4.0)
        truth = erlang.pdf(x)
        curves = []
        for n_s in (30, 300, 3000):
            cfg = simulator.SimulationConfig(
                params=params, n0=n0, n_lineages=n_s, seed=seed + n_s
            )
            times = simulator.times_array(simulator.simulate_batch(cfg))
            c_hat = estimators.c_hat_from_curve(
                x, _noise_free_estimate_1(params, erlang, x)
            )
            alpha = estimators.smoothing_alpha(c_hat, 0.1, n_s)
            curves.append((f"n_s = {n_s}", estimators.bar_n0_1(times, params.bm1, alpha, x)))
        base = os.path.join(outdir, f"one-telo-ns-sweep_{tag}")
        write_csv(
            base + ".csv",
            ["x"] + [f"estimate_ns{n}" for n in (30, 300, 3000)] + ["true_density"],
            [x] + [c[1] for c in curves] + [truth],
        )
        overlay_figure(
            base + ".svg", x, curves, truth,
            title=f"log-KDE estimates, n0 = Erlang({erlang.shape}, {erlang.rate:g})",
        )
        paths += [base + ".csv", base + ".svg"]
    return paths


_PEAK_CASES = (
    (ErlangLaw(1, 4.0), 5, "h1_4_k5", 201),
    (ErlangLaw(2, 1.5), 16, "h2_1.5_k16", 202),
)


def fig_multi_telo_peak(outdir):
    """Sample-based 2k estimates (n_s = 3000, alpha = 0.275): left tail + peak."""
    params = _params(40)
    paths = []
    for erlang, k, tag, seed in _PEAK_CASES:
        n0 = initial_from_erlang(erlang)
        cfg = simulator.SimulationConfig(
            params=params, n0=n0, n_lineages=3000, seed=seed, k=k
        )
        times = simulator.times_array(simulator.simulate_batch(cfg))
        x = _grid(1.5 if erlang.shape == 1 else 3.0)
        est = estimators.bar_n0_2k(times, params.bm1, k, 0.275, x)
        truth = erlang.pdf(x)
        base = os.path.join(outdir, f"multi-telo-peak_{tag}")
        write_csv(base + ".csv", ["x", "estimate", "true_density"], [x, est, truth])
        overlay_figure(
            base + ".svg", x, [(f"estimate (k = {k}, alpha = 0.275)", est)], truth,
            title=f"survival-power estimate, n0 = Erlang({erlang.shape}, {erlang.rate:g})",
        )
        paths += [base + ".csv", base + ".svg"]
    return paths


def fig_signalling_histograms(outdir):
    """Histograms of the signalling telomere's initial length, symlog counts."""
    params = _params(40)
    paths = []
    for erlang, k, tag, seed in _PEAK_CASES:
        n0 = initial_from_erlang(erlang)
        cfg = simulator.SimulationConfig(
            params=params, n0=n0, n_lineages=3000, seed=seed, k=k
        )
        samples = simulator.simulate_batch(cfg)
        lengths = np.array([s.signalling_initial_length for s in samples])
        scale = bounds.weibull_scale(erlang.shape, erlang.rate, k)
        xs = np.linspace(1e-4, max(1.2 * lengths.max(), 4.0 * scale), 400)
        # overlays scaled to histogram counts: n_s * bin_width * density
        bin_width = (lengths.max() - lengths.min()) / 40.0
        n0_y = 3000 * bin_width * erlang.pdf(xs)
        u = xs / scale
        weib_y = (
            3000 * bin_width
            * (erlang.shape / scale) * u ** (erlang.shape - 1) * np.exp(-(u ** erlang.shape))
        )
        base = os.path.join(outdir, f"signalling-histogram_{tag}")
        write_csv(
            base + ".csv",
            ["x", "n0_scaled", "weibull_scaled"],
            [xs, n0_y, weib_y],
        )
        histogram_figure(
            base + ".svg", lengths, n0_curve=(xs, n0_y), weibull_curve=(xs, weib_y),
            title=f"signalling lengths, n0 = Erlang({erlang.shape}, {erlang.rate:g}), k = {k}",
        )
        paths += [base + ".csv", base + ".svg"]
    return paths


FIGURES = {
    "one-telo-N-sweep": fig_one_telo_n_sweep,
    "cv-sweep": fig_cv_sweep,
    "k-small": fig_k_small,
    "k-large": fig_k_large,
    "one-telo-ns-sweep": fig_one_telo_ns_sweep,
    "multi-telo-peak": fig_multi_telo_peak,
    "signalling-histograms": fig_signalling_histograms,
}


def render_figure(figure_id, outdir):
    """Render one recipe (or 'all'); unknown ids list the valid ones."""
    os.makedirs(outdir, exist_ok=True)
    if figure_id == "all":
        paths = []
        for fn in FIGURES.values():
            paths += fn(outdir)
        return paths
    if figure_id not in FIGURES:
        valid = ", ".join(sorted(list(FIGURES) + ["all"]))
        raise ConfigError(f"unknown figure id {figure_id!r}; valid ids: {valid}")
    return FIGURES[figure_id](outdir)
