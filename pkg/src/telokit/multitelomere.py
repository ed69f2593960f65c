"""Combinatorics and shortening measure of the 2k-telomere model.

Telomeres are indexed 1..2k; indices i and i+k sit on the two ends of
chromosome i.  A division shortens exactly one end of every chromosome, so
the admissible index sets are the 2^k subsets picking i or i+k per
chromosome.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import CapacityError

ENUMERATION_MAX_K = 20


def _check_k(k):
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    return int(k)


def enumerate_shortening_sets(k):
    """All index sets that shorten one telomere per chromosome.

    Returns the 2^k frozensets of size k; enumeration is capped at k = 20,
    beyond which only sampling is sensible.
    """
    k = _check_k(k)
    if k > ENUMERATION_MAX_K:
        raise CapacityError(
            f"enumerating 2^{k} shortening sets exceeds the k <= "
            f"{ENUMERATION_MAX_K} cap; draw from MuMeasure.sample instead"
        )
    sets = []
    for bits in product((0, 1), repeat=k):
        sets.append(frozenset(i + k * bit for i, bit in zip(range(1, k + 1), bits)))
    return sets


def count_sets_containing(k, *indices):
    """Number of shortening sets containing the given one or two indices."""
    k = _check_k(k)
    if not 1 <= len(indices) <= 2:
        raise ValueError("expected one or two indices")
    for i in indices:
        if int(i) != i or not 1 <= i <= 2 * k:
            raise ValueError(f"index {i} outside 1..{2 * k}")
    if len(indices) == 1:
        return 2 ** (k - 1)
    i, j = (int(v) for v in indices)
    if i == j:
        raise ValueError("indices must be distinct")
    if i % k == j % k:
        return 0
    return 0 if k == 1 else 2 ** (k - 2)


@dataclass(frozen=True)
class MuMeasure:
    """Per-division shortening measure on R_+^{2k}.

    A uniformly drawn shortening set receives i.i.d. draws from the scalar
    law; the remaining coordinates stay at zero.  Drawing the set uniformly
    over the 2^k candidates is realised as independent fair coin flips per
    chromosome, which is equivalent and O(k).
    """

    k: int
    law: object

    def __post_init__(self):
        object.__setattr__(self, "k", _check_k(self.k))

    @property
    def dimension(self):
        return 2 * self.k

    @property
    def coordinate_mean(self):
        """First moment of every coordinate, m1/2."""
        return self.law.m1 / 2.0

    @property
    def sigma(self):
        """Sum of all second moments: m1^2 k^2 + (m2 - m1^2) k."""
        m1, m2 = self.law.m1, self.law.m2
        return m1 * m1 * self.k * self.k + (m2 - m1 * m1) * self.k

    def laplace(self, s):
        """Laplace transform along the diagonal: laplace_g(s)^k."""
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise ValueError("Laplace transform requires s >= 0")
        out = np.asarray(self.law.laplace(s)) ** self.k
        return float(out) if out.ndim == 0 else out

    def sample(self, rng, size=None):
        """Draw shortening vectors; shape (2k,) or (size, 2k)."""
        k, d = self.k, 2 * self.k
        if size is None:
            choice = rng.integers(0, 2, size=k)
            mags = self.law.sample(rng, k)
            out = np.zeros(d)
            out[np.arange(k) + k * choice] = mags
            return out
        choice = rng.integers(0, 2, size=(size, k))
        mags = self.law.sample(rng, (size, k))
        out = np.zeros((size, d))
        rows = np.arange(size)[:, None]
        out[rows, np.arange(k)[None, :] + k * choice] = mags
        return out
