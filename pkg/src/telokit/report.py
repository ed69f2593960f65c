"""Delimited output and figure rendering.

CSV files are comma-separated, '.' decimal, header row, UTF-8, LF endings,
with floats at full precision so reruns are byte-identical.  Figures are
rendered with matplotlib to SVG next to the delimited data.
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

matplotlib.rcParams["svg.hashsalt"] = "telokit"


def fmt(value):
    """Full-precision, locale-independent float formatting."""
    return format(float(value), ".17g")


def write_csv(path, header, columns):
    """Write named columns of equal length."""
    rows = zip(*columns)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, (str, int)) else fmt(v) for v in row])


def read_single_column_csv(path, column):
    """Read one float column; parse failures report the offending line."""
    from .errors import DataError

    values = []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or column not in header:
            raise DataError(f"{path}: expected a header row containing {column!r}")
        idx = header.index(column)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                value = float(row[idx])
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{lineno}: bad value in column {column!r}") from exc
            if value <= 0:
                raise DataError(f"{path}:{lineno}: entries must be strictly positive")
            values.append(value)
    if not values:
        raise DataError(f"{path}: no data rows")
    return values


def new_figure(xlabel, ylabel, title=None):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    return fig, ax


def save_figure(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def overlay_figure(path, x, curves, truth=None, xlabel="initial length",
                   ylabel="density", title=None):
    """Line plot of estimate curves with an optional dotted truth curve."""
    fig, ax = new_figure(xlabel, ylabel, title)
    for label, values in curves:
        ax.plot(x, values, label=label)
    if truth is not None:
        ax.plot(x, truth, "k:", label="true density")
    ax.legend()
    save_figure(fig, path)


def histogram_figure(path, values, n0_curve=None, weibull_curve=None, bins=40,
                     xlabel="initial length of the signalling telomere",
                     title=None):
    """Histogram on a symlog count scale with optional overlay curves.

    The symlog scale keeps single-count bars visible while large bars retain
    the linear-scale shape.
    """
    fig, ax = new_figure(xlabel, "lineages", title)
    ax.hist(values, bins=bins, color="tab:green", alpha=0.7, label="simulated")
    if n0_curve is not None:
        x, y = n0_curve
        ax.plot(x, y, "k-", label="initial density (scaled)")
    if weibull_curve is not None:
        x, y = weibull_curve
        ax.plot(x, y, "r-", label="Weibull limit (scaled)")
    ax.set_yscale("symlog", linthresh=10.0)
    ax.legend()
    save_figure(fig, path)
