"""Command-line entry point.

Subcommands: simulate, estimate, crosscheck, bounds, figures.  Exit codes:
0 success, 1 usage or config error, 2 data error, 3 crosscheck failure.
"""

from __future__ import annotations

import argparse
import os
import statistics
import sys

import numpy as np
from scipy import integrate, stats

from . import analytic, bounds, estimators, figures, simulator
from .config import RunConfig, load_config
from .distributions import ErlangLaw, ScaledParams, initial_from_erlang
from .errors import ConfigError, DataError, TelokitError
from .report import fmt, overlay_figure, read_single_column_csv, write_csv

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_CROSSCHECK = 3


def _scaled_params(cfg: RunConfig):
    return ScaledParams(b=cfg.b, N=cfg.N, law=cfg.g)


def _sim_config(cfg: RunConfig, n0):
    return simulator.SimulationConfig(
        params=_scaled_params(cfg),
        n0=n0,
        n_lineages=cfg.n_lineages,
        seed=cfg.seed,
        k=cfg.k if cfg.dimension == "2k" else None,
    )


def _prepare_outdir(cfg: RunConfig, override):
    outdir = override or cfg.directory
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "effective_config.ini"), "w", encoding="utf-8") as fh:
        fh.write(cfg.to_ini())
    return outdir


def _symlog_bar(count, width=40):
    # linear up to 10 counts, logarithmic above, like a symlog axis
    if count <= 0:
        return ""
    size = count if count <= 10 else 10 + 10 * np.log10(count / 10.0)
    return "#" * max(1, int(round(min(size, width))))


def cmd_simulate(cfg: RunConfig, outdir):
    n0 = initial_from_erlang(cfg.n0)
    samples = simulator.simulate_batch(_sim_config(cfg, n0))
    csv_path = os.path.join(outdir, "senescence_times.csv")
    simulator.write_samples_csv(samples, csv_path)

    times = [s.time for s in samples]
    lengths = [s.signalling_initial_length for s in samples]
    counts, edges = np.histogram(lengths, bins=20)
    lines = [
        f"lineages             {len(samples)}",
        f"mean senescence time {fmt(statistics.fmean(times))}",
        f"median senescence time {fmt(statistics.median(times))}",
        "",
        "signalling initial length histogram (symlog bars)",
    ]
    for lo, hi, c in zip(edges[:-1], edges[1:], counts):
        lines.append(f"  [{lo:10.5f}, {hi:10.5f})  {c:6d}  {_symlog_bar(c)}")
    summary = "\n".join(lines) + "\n"
    with open(os.path.join(outdir, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(summary)
    print(summary, end="")
    print(f"wrote {csv_path}")
    return EXIT_OK


def _pick_alpha(cfg: RunConfig, params, times):
    if cfg.alpha is not None:
        return cfg.alpha, "alpha set directly"
    # pilot plug-in: the roughness constant of the smoothed estimator itself,
    # evaluated at the unit-roughness smoothing value
    if cfg.p is None:
        raise ConfigError("estimation needs alpha or p")
    pilot = estimators.smoothing_alpha(1.0, cfg.p, times.size, cfg.k)
    grid = np.linspace(cfg.x_max / cfg.n_points, cfg.x_max, cfg.n_points)
    bm1 = params.bm1
    if cfg.dimension == "1":
        c_hat = estimators.c_hat_kde_1(times, bm1, pilot, grid)
    else:
        vals = estimators.bar_n0_2k(times, bm1, cfg.k, pilot, grid)
        c_hat = estimators.c_hat_from_curve(grid, vals)
    alpha = estimators.smoothing_alpha(c_hat, cfg.p, times.size, cfg.k)
    return alpha, f"alpha_p for p = {cfg.p:g} with pilot roughness {c_hat:.6g}"


def cmd_estimate(cfg: RunConfig, outdir, data_path=None, synthetic=False):
    params = _scaled_params(cfg)
    n0 = initial_from_erlang(cfg.n0)
    if synthetic:
        samples = simulator.simulate_batch(_sim_config(cfg, n0))
        times = simulator.times_array(samples)
        source = f"synthetic ({cfg.n_lineages} lineages, seed {cfg.seed})"
    else:
        times = np.sort(np.asarray(read_single_column_csv(data_path, "time_hours")))
        source = data_path
    if times.size == 0:
        raise DataError("empty dataset")

    alpha, alpha_note = _pick_alpha(cfg, params, times)
    grid = np.linspace(cfg.x_max / cfg.n_points, cfg.x_max, cfg.n_points)
    job = estimators.EstimationJob(
        params=params, times=times, alpha=alpha, x_grid=grid,
        k=cfg.k if cfg.dimension == "2k" else None,
    )
    est = job.estimate()

    # experimental data report physical lengths: shift by the senescence threshold
    shift = 0.0 if synthetic else cfg.l_min
    out_x = grid + shift

    csv_path = os.path.join(outdir, "estimate.csv")
    meta_lines = [
        f"data             {source}",
        f"n_samples        {times.size}",
        f"dimension        {cfg.dimension}",
        f"k                {cfg.k if cfg.k is not None else '-'}",
        f"alpha            {fmt(alpha)} ({alpha_note})",
        f"drift b*m1       {fmt(params.bm1)}",
        f"length shift     {fmt(shift)}",
    ]
    if synthetic:
        truth = cfg.n0.pdf(grid)
        sup_err = float(np.max(np.abs(est - truth)))
        l2_err = float(np.sqrt(np.trapezoid((est - truth) ** 2, grid)))
        meta_lines += [
            f"sup error        {fmt(sup_err)}",
            f"l2 error         {fmt(l2_err)}",
        ]
        write_csv(csv_path, ["x", "density", "true_density"], [out_x, est, truth])
        if "svg" in cfg.formats:
            overlay_figure(
                os.path.join(outdir, "estimate.svg"), out_x,
                [(f"estimate (alpha = {alpha:.3g})", est)], truth,
            )
    else:
        write_csv(csv_path, ["x", "density"], [out_x, est])
        if "svg" in cfg.formats:
            overlay_figure(
                os.path.join(outdir, "estimate.svg"), out_x,
                [(f"estimate (alpha = {alpha:.3g})", est)],
            )
    with open(os.path.join(outdir, "estimate_meta.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(meta_lines) + "\n")
    print("\n".join(meta_lines))
    print(f"wrote {csv_path}")
    return EXIT_OK


def _crosscheck_rows(cfg: RunConfig):
    """Reduced-size versions of the library's agreement suites."""
    params = _scaled_params(cfg)
    rows = []

    def add(name, measured, tol, ok=None):
        ok = (measured <= tol) if ok is None else ok
        rows.append((name, measured, tol, bool(ok)))

    # exponential-case triple agreement
    erl = ErlangLaw(1, 4.0)
    n0 = initial_from_erlang(erl)
    case = analytic.explicit_exponential_case(params, erl)
    xq = np.linspace(0.01, 2.0, 200)
    t_max = float(xq[-1]) / params.bm1
    x_max = 8.0 / erl.rate + params.b_tilde * params.delta_tilde * t_max
    oracle = analytic.grid_oracle_n1(params, n0, t_max=t_max, x_max=x_max)
    hat_oracle = estimators.hat_n0_1(oracle.flux_at, params.bm1, xq)
    add("exponential: oracle vs explicit estimator (sup)",
        float(np.max(np.abs(hat_oracle - case.estimator(xq)))), 2e-3)

    sim_cfg = simulator.SimulationConfig(
        params=params, n0=n0, n_lineages=20000, seed=cfg.seed
    )
    times = simulator.times_array(simulator.simulate_batch(sim_cfg))
    c_hat = estimators.c_hat_from_curve(xq, case.estimator(xq))
    alpha = estimators.smoothing_alpha(c_hat, 0.1, times.size)
    bar = estimators.bar_n0_1(times, params.bm1, alpha, xq)
    add("exponential: log-KDE vs explicit estimator (weighted sup)",
        float(np.max(xq * np.abs(bar - case.estimator(xq)))), 0.05)

    # mass conservation of the grid oracle
    oracle3 = analytic.grid_oracle_n1(
        params, n0, t_max=3.0, x_max=10.0 / erl.rate + params.bm1 * 3.0,
        dx=params.delta_tilde / 32.0,
    )
    add("grid oracle: mass conservation (t <= 3)",
        float(np.max(np.abs(oracle3.mass - 1.0))), 1e-4)

    # senescent + alive fractions add to one, by construction
    t_mid = float(np.median(times))
    surv = simulator.empirical_survival(times, t_mid)
    dead = 1.0 - surv
    add("monte carlo: senescent + alive = 1", abs(surv + dead - 1.0), 0.0,
        ok=(surv + dead) == 1.0)

    # transport tail identity
    sol = analytic.TransportSolution(n0, params, k=16)
    worst = 0.0
    for t in np.linspace(0.0, 2.0, 5):
        lhs, _ = integrate.quad(sol.u2k_boundary, t, np.inf, limit=200)
        worst = max(worst, abs(lhs - float(sol.u2k_tail(t))))
    add("transport: 2k tail identity (k = 16)", worst, 1e-8)

    # Weibull minimum diagnostic at k = 50
    rng = np.random.Generator(np.random.Philox(key=np.array([cfg.seed, 2 ** 32], dtype=np.uint64)))
    k50 = 50
    draws = cfg.n0.sample(rng, (20000, 2 * k50))
    mins = draws.min(axis=1) / bounds.weibull_scale(cfg.n0.shape, cfg.n0.rate, k50)
    ks = stats.kstest(mins, lambda x: bounds.weibull_limit_cdf(cfg.n0.shape, x))
    add("extreme values: scaled minima vs Weibull limit (KS, k = 50)",
        float(ks.statistic), 0.05)

    # decay-rate ordering
    ctx = bounds.BoundContext(params, n0, k=cfg.k or 16)
    ordered = ctx.lam_prime_N <= ctx.lam_N <= n0.lam + 1e-12
    add("constants: lambda'_N <= lambda_N <= lambda",
        0.0 if ordered else 1.0, 0.0, ok=ordered)
    return rows


def cmd_crosscheck(cfg: RunConfig, outdir):
    rows = _crosscheck_rows(cfg)
    width = max(len(r[0]) for r in rows)
    lines = []
    all_ok = True
    for name, measured, tol, ok in rows:
        all_ok &= ok
        lines.append(
            f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  measured {measured:.3e}  tol {tol:.3e}"
        )
    text = "\n".join(lines) + "\n"
    print(text, end="")
    with open(os.path.join(outdir, "crosscheck.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    write_csv(
        os.path.join(outdir, "crosscheck.csv"),
        ["check", "measured", "tolerance", "pass"],
        [
            [r[0] for r in rows],
            [r[1] for r in rows],
            [r[2] for r in rows],
            [int(r[3]) for r in rows],
        ],
    )
    return EXIT_OK if all_ok else EXIT_CROSSCHECK


def cmd_bounds(cfg: RunConfig, outdir):
    params = _scaled_params(cfg)
    n0 = initial_from_erlang(cfg.n0)
    k = cfg.k if cfg.dimension == "2k" else None
    ctx = bounds.BoundContext(params, n0, k=k)
    rows = [
        ("lambda (tail rate)", n0.lam),
        ("lambda_N", ctx.lam_N),
        ("C_lambda", n0.C_lam),
        ("C'_lambda", n0.Cprime_lam),
        ("D_lambda", n0.D_lam),
        ("omega", n0.omega),
        ("D_omega", n0.D_omega),
        ("c1 (sufficient, not sharp)", ctx.c1),
        ("L_1N (sufficient, not sharp)", ctx.L_1N),
        ("dkw radius (p=0.1, n_s)", bounds.dkw_radius(cfg.n_lineages, 0.1)),
    ]
    if k is not None:
        rows += [
            ("lambda'_N", ctx.lam_prime_N),
            ("beta'_N", ctx.beta_prime_N),
            ("d1 (sufficient, not sharp)", ctx.d1),
            ("L_2kN (sufficient, not sharp)", ctx.L_2kN),
            ("dkw radius 2k (p=0.1, n_s)", bounds.dkw_radius(cfg.n_lineages, 0.1, k)),
        ]
    width = max(len(r[0]) for r in rows)
    lines = [f"{name:<{width}}  {value:.10g}" for name, value in rows]
    text = "\n".join(lines) + "\n"
    print(text, end="")
    with open(os.path.join(outdir, "bounds.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)

    grid = np.linspace(0.0, cfg.x_max, cfg.n_points)
    cols = [grid, bounds.pointwise_error_bound_1(ctx, grid)]
    header = ["x", "pointwise_bound_1"]
    if k is not None:
        cols.append(bounds.pointwise_error_bound_2k(ctx, grid))
        header.append("pointwise_bound_2k")
    write_csv(os.path.join(outdir, "bound_curves.csv"), header, cols)
    return EXIT_OK


def cmd_figures(figure_id, outdir):
    paths = figures.render_figure(figure_id, outdir)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="telokit",
        description="telomere-shortening lineage simulation and initial-length estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("simulate", "estimate", "crosscheck", "bounds"):
        p = sub.add_parser(name)
        p.add_argument("config", help="run configuration file (INI)")
        p.add_argument("--out", help="output directory (overrides [output] directory)")
    est = sub.choices["estimate"]
    group = est.add_mutually_exclusive_group(required=True)
    group.add_argument("--data", help="CSV of senescence times (column time_hours)")
    group.add_argument("--synthetic", action="store_true",
                       help="simulate the configured model and estimate from it")

    fig = sub.add_parser("figures")
    fig.add_argument("figure_id", help="figure id, or 'all', or 'list'")
    fig.add_argument("--out", default="figures", help="output directory")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for data errors here
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.command == "figures":
            if args.figure_id == "list":
                for fid in sorted(figures.FIGURES):
                    print(fid)
                return EXIT_OK
            return cmd_figures(args.figure_id, args.out)
        cfg = load_config(args.config)
        outdir = _prepare_outdir(cfg, args.out)
        if args.command == "simulate":
            return cmd_simulate(cfg, outdir)
        if args.command == "estimate":
            return cmd_estimate(cfg, outdir, data_path=args.data, synthetic=args.synthetic)
        if args.command == "crosscheck":
            return cmd_crosscheck(cfg, outdir)
        if args.command == "bounds":
            return cmd_bounds(cfg, outdir)
        raise ConfigError(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TelokitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
