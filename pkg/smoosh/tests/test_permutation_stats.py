"""
Unit Tests for permutation-distribution measurement

Total variation and chi-square against uniform, card statistics,
and the empirical dominance check.
"""

import math
from itertools import combinations, permutations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from smoosh.analysis.permutation_stats import (
    PermSample,
    cayley_distance,
    cdf_dominance,
    chi_square_uniformity,
    ks_to_uniform,
    lis_length,
    relative_order,
    spearman_footrule,
    test_statistics as card_statistics,
    tv_to_uniform,
    uniform_reference,
)
from smoosh.core.errors import ParameterError, UndersampledError


def brute_force_lis(seq):
    for size in range(len(seq), 0, -1):
        for idx in combinations(range(len(seq)), size):
            picked = [seq[i] for i in idx]
            if all(a < b for a, b in zip(picked, picked[1:])):
                return size
    return 0


def exact_uniform(m, copies):
    return PermSample(m, {p: copies for p in permutations(range(m))})


# ===== PermSample =====

class TestPermSample:
    """Test the count container"""

    def test_rejects_large_m(self):
        """Test m above 8"""
        with pytest.raises(ParameterError):
            PermSample(9)

    def test_rejects_non_permutation(self):
        """Test keys and added rows must be permutations"""
        with pytest.raises(ParameterError):
            PermSample(3, {(0, 0, 1): 2})
        sample = PermSample(3)
        with pytest.raises(ParameterError):
            sample.add([0, 1, 1])

    def test_counts(self):
        """Test totals and the full cell vector"""
        sample = PermSample.from_permutations([[0, 1, 2], [0, 1, 2], [2, 1, 0]])
        assert sample.n_total == 3
        assert sample.n_cells == 6
        counts = sample.cell_counts()
        assert counts[0] == 2 and counts[-1] == 1 and counts.sum() == 3

    def test_merge_commutes(self):
        """Test merging in either order gives the same counts"""
        a = PermSample.from_permutations([[0, 1], [1, 0], [1, 0]])
        b = PermSample.from_permutations([[0, 1]])
        assert a.merge(b).counts == b.merge(a).counts == {(0, 1): 2, (1, 0): 2}
        with pytest.raises(ParameterError):
            a.merge(PermSample(3))

    def test_empty_needs_m(self):
        """Test from_permutations without rows or m"""
        with pytest.raises(ParameterError):
            PermSample.from_permutations([])
        assert PermSample.from_permutations([], m=4).n_total == 0

    def test_uniform_reference(self):
        """Test the reference law sums to one"""
        ref = uniform_reference(4)
        assert ref.shape == (24,)
        assert ref.sum() == pytest.approx(1.0)


# ===== Distance to uniform =====

class TestTotalVariation:
    """Test tv_to_uniform"""

    def test_exact_uniform_counts(self, rng):
        """Test TV = 0 for perfectly balanced counts"""
        estimate, _ = tv_to_uniform(exact_uniform(3, 10), rng)
        assert estimate == pytest.approx(0.0, abs=1e-15)

    def test_point_mass(self, rng):
        """Test TV = 1 - 1/m! for a point mass"""
        estimate, se = tv_to_uniform(PermSample(2, {(0, 1): 40}), rng)
        assert estimate == pytest.approx(0.5)
        assert se == pytest.approx(0.0, abs=1e-15)
        estimate, _ = tv_to_uniform(PermSample(3, {(1, 0, 2): 60}), rng)
        assert estimate == pytest.approx(1 - 1 / 6)

    def test_undersampled(self, rng):
        """Test fewer than 10·m! samples"""
        with pytest.raises(UndersampledError) as info:
            tv_to_uniform(PermSample(3, {(0, 1, 2): 59}), rng)
        assert info.value.required == 60

    def test_uniform_draws_are_close(self):
        """Test the plug-in estimate for i.i.d. uniform permutations is small"""
        rng = np.random.default_rng(5)
        sample = PermSample.from_permutations([rng.permutation(4) for _ in range(24_000)])
        estimate, se = tv_to_uniform(sample, rng)
        assert estimate < 0.03
        assert 0.0 < se < 0.01


class TestChiSquare:
    """Test chi_square_uniformity"""

    def test_all_mass_in_one_cell(self):
        """Test the statistic for 600 draws of one permutation of 3"""
        statistic, pvalue = chi_square_uniformity(PermSample(3, {(0, 1, 2): 600}))
        assert statistic == pytest.approx(3000.0)
        assert pvalue < 1e-100

    def test_balanced(self):
        """Test zero statistic for balanced counts"""
        statistic, pvalue = chi_square_uniformity(exact_uniform(3, 20))
        assert statistic == pytest.approx(0.0)
        assert pvalue == pytest.approx(1.0)


# ===== Card statistics =====

class TestCardStatistics:
    """Test the statistics of a single arrangement"""

    def test_identity(self):
        """Test an unchanged deck"""
        deck = list(range(7))
        stats_ = card_statistics(deck, deck)
        assert stats_ == (1, 7, 6, 0, 0, 7)

    def test_reversal(self):
        """Test a reversed five-card deck"""
        stats_ = card_statistics([4, 3, 2, 1, 0], [0, 1, 2, 3, 4])
        assert stats_.top_card_position == 5
        assert stats_.bottom_card_position == 1
        assert stats_.spearman_footrule == 12
        assert stats_.lis_length == 1
        assert stats_.cayley_distance == 2
        assert stats_.adjacent_pairs_preserved == 4

    def test_labels_are_relative(self):
        """Test arbitrary labels are ranked against the reference"""
        stats_ = card_statistics(['b', 'a', 'c'], ['a', 'b', 'c'])
        assert stats_.cayley_distance == 1
        assert stats_.top_card_position == 2

    def test_mismatched_cards(self):
        """Test perm and reference holding different cards"""
        with pytest.raises(ParameterError):
            relative_order([0, 1, 2], [0, 1, 3])

    def test_cayley_and_footrule(self):
        """Test a 3-cycle"""
        rel = np.array([1, 2, 0])
        assert cayley_distance(rel) == 2
        assert spearman_footrule(rel) == 4

    @given(st.lists(st.integers(min_value=-5, max_value=5), max_size=9))
    def test_lis_matches_brute_force(self, seq):
        """Test patience sorting against exhaustive search"""
        assert lis_length(seq) == brute_force_lis(seq)

    @given(st.permutations(list(range(8))))
    def test_cayley_bounds(self, perm):
        """Test 0 <= Cayley distance <= m - 1, footrule is even and LIS(σ)·LIS(reversed σ) >= m"""
        rel = np.array(perm)
        assert 0 <= cayley_distance(rel) <= 7
        assert spearman_footrule(rel) % 2 == 0
        assert lis_length(perm) * lis_length(perm[::-1]) >= 8

    @given(st.integers(min_value=1, max_value=9).flatmap(lambda m: st.permutations(list(range(m)))))
    def test_increasing_times_decreasing(self, perm):
        """Test LIS(σ)·LIS(reversed σ) >= m for permutations of every size up to 9"""
        assert lis_length(perm) * lis_length(list(reversed(perm))) >= len(perm)


# ===== Dominance =====

class TestDominance:
    """Test cdf_dominance and ks_to_uniform"""

    def test_shifted_exponentials(self):
        """Test Exp(2) is dominated by Exp(1) and not the reverse"""
        rng = np.random.default_rng(11)
        small = rng.exponential(0.5, 5000)
        large = rng.exponential(1.0, 5000)
        assert cdf_dominance(small, large).holds
        reverse = cdf_dominance(large, small)
        assert not reverse.holds
        assert reverse.max_violation > reverse.tolerance

    def test_same_law_within_tolerance(self):
        """Test two samples of one law pass"""
        rng = np.random.default_rng(12)
        assert cdf_dominance(rng.random(4000), rng.random(4000)).holds

    def test_tolerance(self):
        """Test the DKW tolerance value"""
        result = cdf_dominance([0.0] * 100, [1.0] * 100, alpha=math.exp(-2))
        assert result.tolerance == pytest.approx(math.sqrt(0.02))
        assert result.holds and result.max_violation <= 0.0

    def test_empty(self):
        """Test empty input"""
        with pytest.raises(ParameterError):
            cdf_dominance([], [1.0])

    def test_ks_to_uniform(self):
        """Test KS distance to U[0, 1]"""
        assert ks_to_uniform(np.random.default_rng(13).random(5000)) < 0.03
        assert ks_to_uniform(np.full(100, 0.5)) == pytest.approx(0.5)
