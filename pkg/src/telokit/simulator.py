"""Monte Carlo simulation of telomere-shortening lineages.

A lineage divides after Exp(b_tilde) waiting times; each division shortens
the telomere vector by a draw from the rescaled shortening measure, and the
lineage is absorbed (senescent) at the first division that sends some
coordinate below zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .multitelomere import MuMeasure

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class SenescenceSample:
    """Outcome of one lineage: absorption time and the telomere that caused it.

    ``signalling_index`` is 1-based; for the 2k model indices i and i+k are
    the two ends of chromosome i.  ``divisions`` counts the divisions up to
    and including the absorbing one (diagnostic, not serialised).
    """

    time: float
    signalling_index: int
    signalling_initial_length: float
    divisions: int = 0


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters of a lineage batch.

    ``k`` is the chromosome count of the 2k-telomere model; ``None`` selects
    the one-telomere toy model.  Initial coordinates are always i.i.d. from
    the initial distribution (product initial condition).
    """

    params: object
    n0: object
    n_lineages: int
    seed: int
    k: int | None = None
    iid_initial: bool = True

    def __post_init__(self):
        if self.n_lineages < 1:
            raise ConfigError("n_lineages must be >= 1")
        if not 0 <= self.seed <= _SEED_MASK:
            raise ConfigError("seed must fit in 64 bits")
        if self.k is not None and (int(self.k) != self.k or self.k < 1):
            raise ConfigError("k must be a positive integer or None")
        if not self.iid_initial:
            raise ConfigError("only i.i.d. initial coordinates are supported")

    @property
    def dimension(self):
        return 1 if self.k is None else 2 * self.k


def lineage_rng(seed, index):
    """Counter-based stream for one lineage, independent of execution order."""
    key = np.array([seed & _SEED_MASK, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def simulate_lineage(cfg: SimulationConfig, rng) -> SenescenceSample:
    """Run one lineage to absorption.

    Division waits and shortening draws are consumed in growing blocks so the
    hot path stays vectorised; the stream is private to the lineage, so block
    sizes do not affect other lineages.
    """
    params = cfg.params
    b_tilde = params.b_tilde
    if cfg.k is None:
        x0 = float(cfg.n0.sample(rng))
        draw = lambda n: params.sample_tilde(rng, n)
        initial = np.array([x0])
    else:
        mu = MuMeasure(cfg.k, params.law)
        initial = np.asarray(cfg.n0.sample(rng, mu.dimension), dtype=float)
        draw = lambda n: mu.sample(rng, n) / params.N
    lengths = initial.copy()
    t = 0.0
    done = 0
    block = 64
    while True:
        waits = rng.exponential(1.0 / b_tilde, block)
        shorts = draw(block)
        if cfg.k is None:
            remaining = lengths[0] - np.cumsum(shorts)
            negative = remaining < 0.0
            if negative.any():
                j = int(np.argmax(negative))
                return SenescenceSample(
                    t + float(waits[: j + 1].sum()), 1, initial[0], done + j + 1
                )
            lengths[0] = remaining[-1]
        else:
            remaining = lengths[None, :] - np.cumsum(shorts, axis=0)
            negative = (remaining < 0.0).any(axis=1)
            if negative.any():
                j = int(np.argmax(negative))
                coord = int(np.argmax(remaining[j] < 0.0))
                return SenescenceSample(
                    t + float(waits[: j + 1].sum()),
                    coord + 1,
                    float(initial[coord]),
                    done + j + 1,
                )
            lengths = remaining[-1]
        t += float(waits.sum())
        done += block
        block = min(block * 2, 1024)


def simulate_batch(cfg: SimulationConfig):
    """Independent lineages, sorted by senescence time.

    Each lineage uses a stream derived from (seed, lineage index), so results
    are identical for any execution order or degree of parallelism.
    """
    samples = [
        simulate_lineage(cfg, lineage_rng(cfg.seed, i)) for i in range(cfg.n_lineages)
    ]
    samples.sort(key=lambda s: s.time)
    return samples


def times_array(samples):
    """Senescence times of a sorted batch as a float array."""
    return np.array([s.time for s in samples])


def empirical_survival(times_sorted, t):
    """Fraction of samples strictly beyond t; right-continuous step function."""
    times_sorted = np.asarray(times_sorted, dtype=float)
    if times_sorted.size == 0:
        raise ValueError("empty sample set")
    n = times_sorted.size
    counts = n - np.searchsorted(times_sorted, np.asarray(t, dtype=float), side="right")
    out = counts / n
    return float(out) if np.ndim(t) == 0 else out


def write_samples_csv(samples, path):
    """CSV with columns time, signalling_index, signalling_initial_length."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time", "signalling_index", "signalling_initial_length"])
        for s in samples:
            writer.writerow(
                [
                    format(float(s.time), ".17g"),
                    s.signalling_index,
                    format(float(s.signalling_initial_length), ".17g"),
                ]
            )


def read_samples_csv(path):
    """Read a batch back; inverse of :func:`write_samples_csv`."""
    samples = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            samples.append(
                SenescenceSample(
                    float(row["time"]),
                    int(row["signalling_index"]),
                    float(row["signalling_initial_length"]),
                )
            )
    return samples
