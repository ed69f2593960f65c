"""Plain-text run configuration: flat INI sections with key = value pairs.

Unknown sections or keys are rejected so a config file documents a run
exactly; every command copies the effective config next to its outputs.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass

from .distributions import ErlangLaw, UniformShortening
from .errors import ConfigError

_LAW_RE = re.compile(r"^\s*(\w+)\s*\(\s*([^,()]+)\s*,\s*([^,()]+)\s*\)\s*$")

_ALLOWED = {
    "model": {"b", "g", "n", "dimension", "k", "n0", "l_min"},
    "run": {"n_lineages", "seed"},
    "estimation": {"alpha", "p", "x_max", "n_points"},
    "output": {"directory", "formats"},
}


def parse_law_spec(spec, where):
    """Parse ``uniform(low, high)`` into a shortening law."""
    m = _LAW_RE.match(spec)
    if not m or m.group(1) != "uniform":
        raise ConfigError(f"{where}: expected uniform(low, high), got {spec!r}")
    try:
        low, high = float(m.group(2)), float(m.group(3))
        return UniformShortening(low, high)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_n0_spec(spec, where):
    """Parse ``erlang(shape, rate)`` into an Erlang law."""
    m = _LAW_RE.match(spec)
    if not m or m.group(1) != "erlang":
        raise ConfigError(f"{where}: expected erlang(shape, rate), got {spec!r}")
    try:
        return ErlangLaw(int(m.group(2)), float(m.group(3)))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


@dataclass
class RunConfig:
    """Validated contents of a run configuration file."""

    b: float
    g: UniformShortening
    N: float
    dimension: str  # "1" or "2k"
    n0: ErlangLaw
    k: int | None = None
    l_min: float = 0.0
    n_lineages: int = 1000
    seed: int = 0
    alpha: float | None = None
    p: float | None = None
    x_max: float = 4.0
    n_points: int = 400
    directory: str = "out"
    formats: tuple = ("csv", "svg")

    def __post_init__(self):
        if self.b <= 0:
            raise ConfigError("model.b must be positive")
        if self.N <= 0:
            raise ConfigError("model.n must be positive")
        if self.dimension not in ("1", "2k"):
            raise ConfigError("model.dimension must be 1 or 2k")
        if self.dimension == "2k":
            if self.k is None or self.k < 1:
                raise ConfigError("model.k must be a positive integer when dimension = 2k")
        elif self.k is not None:
            raise ConfigError("model.k is only meaningful when dimension = 2k")
        if self.l_min < 0:
            raise ConfigError("model.l_min must be nonnegative")
        if self.n_lineages < 1:
            raise ConfigError("run.n_lineages must be >= 1")
        if self.seed < 0:
            raise ConfigError("run.seed must be nonnegative")
        if self.alpha is not None and self.p is not None:
            raise ConfigError("estimation takes alpha or p, not both")
        if self.alpha is not None and self.alpha <= 0:
            raise ConfigError("estimation.alpha must be positive")
        if self.p is not None and not 0.0 < self.p <= 1.0:
            raise ConfigError("estimation.p must lie in (0, 1]")
        if self.x_max <= 0 or self.n_points < 2:
            raise ConfigError("estimation grid needs x_max > 0 and n_points >= 2")
        bad = [f for f in self.formats if f not in ("csv", "svg")]
        if bad:
            raise ConfigError(f"output.formats: unknown format(s) {bad}")

    def to_ini(self):
        lines = ["[model]"]
        lines.append(f"b = {self.b:g}")
        lines.append(f"g = uniform({self.g.low:g}, {self.g.high:g})")
        lines.append(f"n = {self.N:g}")
        lines.append(f"dimension = {self.dimension}")
        if self.k is not None:
            lines.append(f"k = {self.k}")
        lines.append(f"n0 = erlang({self.n0.shape}, {self.n0.rate:g})")
        lines.append(f"l_min = {self.l_min:g}")
        lines.append("")
        lines.append("[run]")
        lines.append(f"n_lineages = {self.n_lineages}")
        lines.append(f"seed = {self.seed}")
        lines.append("")
        lines.append("[estimation]")
        if self.alpha is not None:
            lines.append(f"alpha = {self.alpha:g}")
        if self.p is not None:
            lines.append(f"p = {self.p:g}")
        lines.append(f"x_max = {self.x_max:g}")
        lines.append(f"n_points = {self.n_points}")
        lines.append("")
        lines.append("[output]")
        lines.append(f"directory = {self.directory}")
        lines.append(f"formats = {','.join(self.formats)}")
        lines.append("")
        return "\n".join(lines)


def _get(parser, section, key, cast, where, default=None, required=False):
    if not parser.has_option(section, key):
        if required:
            raise ConfigError(f"{where}: missing required key")
        return default
    raw = parser.get(section, key)
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r} ({exc})") from exc


def parse_config(text):
    """Parse configuration text into a :class:`RunConfig`."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    for section in parser.sections():
        if section not in _ALLOWED:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser.options(section):
            if key not in _ALLOWED[section]:
                raise ConfigError(f"unknown key {section}.{key}")
    for required in ("model", "run"):
        if not parser.has_section(required):
            raise ConfigError(f"missing section [{required}]")

    dimension = _get(parser, "model", "dimension", str, "model.dimension", required=True)
    k = _get(parser, "model", "k", int, "model.k")
    g = parse_law_spec(
        _get(parser, "model", "g", str, "model.g", required=True), "model.g"
    )
    n0 = parse_n0_spec(
        _get(parser, "model", "n0", str, "model.n0", required=True), "model.n0"
    )
    formats = _get(
        parser,
        "output",
        "formats",
        lambda s: tuple(f.strip() for f in s.split(",") if f.strip()),
        "output.formats",
        default=("csv", "svg"),
    )
    return RunConfig(
        b=_get(parser, "model", "b", float, "model.b", required=True),
        g=g,
        N=_get(parser, "model", "n", float, "model.n", required=True),
        dimension=dimension.strip(),
        n0=n0,
        k=k,
        l_min=_get(parser, "model", "l_min", float, "model.l_min", default=0.0),
        n_lineages=_get(parser, "run", "n_lineages", int, "run.n_lineages", required=True),
        seed=_get(parser, "run", "seed", int, "run.seed", required=True),
        alpha=_get(parser, "estimation", "alpha", float, "estimation.alpha"),
        p=_get(parser, "estimation", "p", float, "estimation.p"),
        x_max=_get(parser, "estimation", "x_max", float, "estimation.x_max", default=4.0),
        n_points=_get(parser, "estimation", "n_points", int, "estimation.n_points", default=400),
        directory=_get(parser, "output", "directory", str, "output.directory", default="out"),
        formats=formats,
    )


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
