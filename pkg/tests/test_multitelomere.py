import numpy as np
import pytest
from scipy import stats

from telokit.distributions import UniformShortening
from telokit.errors import CapacityError
from telokit.multitelomere import (
    MuMeasure,
    count_sets_containing,
    enumerate_shortening_sets,
)

UNIT = UniformShortening(0.0, 1.0)


class TestEnumeration:
    def test_k2_exact(self):
        got = set(enumerate_shortening_sets(2))
        assert got == {
            frozenset({1, 2}),
            frozenset({1, 4}),
            frozenset({2, 3}),
            frozenset({3, 4}),
        }

    def test_k1_exact(self):
        assert set(enumerate_shortening_sets(1)) == {frozenset({1}), frozenset({2})}

    @pytest.mark.parametrize("k", range(1, 13))
    def test_cardinality_and_structure(self, k):
        sets = enumerate_shortening_sets(k)
        assert len(sets) == 2 ** k
        assert len(set(sets)) == 2 ** k
        for s in sets:
            assert len(s) == k
            residues = [i % k for i in s]
            assert len(set(residues)) == k

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            enumerate_shortening_sets(21)

    def test_invalid_k(self):
        with pytest.raises(ValueError):
            enumerate_shortening_sets(0)


class TestCounting:
    def test_single_index(self):
        assert count_sets_containing(3, 2) == 4

    def test_pair_congruent(self):
        assert count_sets_containing(2, 1, 3) == 0

    def test_pair_non_congruent_k2(self):
        assert count_sets_containing(2, 1, 2) == 1

    def test_pair_k1(self):
        assert count_sets_containing(1, 1, 2) == 0

    @pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
    def test_counts_match_enumeration(self, k):
        sets = enumerate_shortening_sets(k)
        for i in range(1, 2 * k + 1):
            assert count_sets_containing(k, i) == sum(1 for s in sets if i in s)
            for j in range(i + 1, 2 * k + 1):
                brute = sum(1 for s in sets if i in s and j in s)
                assert count_sets_containing(k, i, j) == brute

    def test_out_of_range_index(self):
        with pytest.raises(ValueError):
            count_sets_containing(2, 5)
        with pytest.raises(ValueError):
            count_sets_containing(2, 1, 1)


class TestMuMeasure:
    def test_coordinate_mean(self):
        mu = MuMeasure(1, UNIT)
        assert mu.coordinate_mean == pytest.approx(0.25)

    def test_sigma_k1(self):
        # m1 = 1/2, m2 = 1/3: sigma = 1/4 + (1/3 - 1/4) = 1/3
        assert MuMeasure(1, UNIT).sigma == pytest.approx(1.0 / 3.0, abs=1e-15)

    def test_sigma_k3(self):
        assert MuMeasure(3, UNIT).sigma == pytest.approx(2.5, abs=1e-14)

    @pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6])
    def test_sigma_matches_enumeration(self, k):
        # independent route: per-pair moments summed over the enumeration,
        # int v_l v_l' dmu = m2 * #{I : l in I}/2^k        (l = l')
        #                    m1^2 * #{I : l, l' in I}/2^k  (l != l')
        mu = MuMeasure(k, UNIT)
        sets = enumerate_shortening_sets(k)
        total = 0.0
        for ell in range(1, 2 * k + 1):
            for ellp in range(1, 2 * k + 1):
                if ell == ellp:
                    frac = sum(1 for s in sets if ell in s) / 2 ** k
                    total += UNIT.m2 * frac
                else:
                    frac = sum(1 for s in sets if ell in s and ellp in s) / 2 ** k
                    total += UNIT.m1 ** 2 * frac
        assert mu.sigma == pytest.approx(total, abs=1e-12)

    def test_laplace_power_of_scalar_transform(self):
        mu = MuMeasure(2, UNIT)
        assert mu.laplace(0.0) == 1.0
        assert mu.laplace(1.0) == pytest.approx((1.0 - np.exp(-1.0)) ** 2, abs=1e-14)
        assert MuMeasure(1, UNIT).laplace(0.7) == pytest.approx(
            UNIT.laplace(0.7), abs=1e-15
        )

    def test_laplace_domain(self):
        with pytest.raises(ValueError):
            MuMeasure(2, UNIT).laplace(-1.0)


class TestMuSampling:
    def _rng(self, seed=7):
        return np.random.Generator(np.random.Philox(key=seed))

    def test_exactly_k_nonzero_coordinates(self):
        mu = MuMeasure(4, UNIT)
        draws = mu.sample(self._rng(), 1000)
        assert draws.shape == (1000, 8)
        assert np.all((draws > 0).sum(axis=1) == 4)

    def test_single_draw_shape(self):
        v = MuMeasure(3, UNIT).sample(self._rng())
        assert v.shape == (6,)
        assert (v > 0).sum() == 3

    def test_coordinate_mean_monte_carlo(self):
        mu = MuMeasure(3, UNIT)
        n = 1_000_000
        draws = mu.sample(self._rng(11), n)
        means = draws.mean(axis=0)
        se = draws.std(axis=0) / np.sqrt(n)
        assert np.all(np.abs(means - mu.coordinate_mean) < 3 * se)

    def test_sigma_monte_carlo(self):
        mu = MuMeasure(3, UNIT)
        draws = mu.sample(self._rng(12), 1_000_000)
        sums_sq = draws.sum(axis=1) ** 2
        assert sums_sq.mean() == pytest.approx(mu.sigma, rel=1e-2)

    def test_index_shortening_frequency(self):
        mu = MuMeasure(5, UNIT)
        n = 200_000
        draws = mu.sample(self._rng(13), n)
        freq = (draws > 0).mean(axis=0)
        se = np.sqrt(0.25 / n)
        assert np.all(np.abs(freq - 0.5) < 3 * se)

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_set_frequencies_uniform(self, k):
        mu = MuMeasure(k, UNIT)
        n = 100_000
        draws = mu.sample(self._rng(100 + k), n)
        # identify the drawn set by which coordinates are nonzero
        bits = (draws[:, k : 2 * k] > 0).astype(int)
        codes = bits @ (1 << np.arange(k))
        counts = np.bincount(codes, minlength=2 ** k)
        res = stats.chisquare(counts)
        assert res.pvalue > 0.001
