"""
Permutation-distribution measurement.

Total variation to the uniform law on S_m, Pearson uniformity tests, card
statistics of a single arrangement, and empirical stochastic-dominance checks.
"""

import math
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass, field
from itertools import permutations
from typing import Dict, Iterable, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from smoosh.core.errors import ParameterError, UndersampledError

MAX_CELLS_M = 8
MIN_SAMPLES_PER_CELL = 10
BOOTSTRAP_RESAMPLES = 200


@dataclass
class PermSample:
    """
    Counts of observed permutations of {0, ..., m-1}.

    Attributes:
        m: Permutation size (at most 8)
        counts: Permutation tuple -> count
    """
    m: int
    counts: Dict[Tuple[int, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        if not (1 <= self.m <= MAX_CELLS_M):
            raise ParameterError(f"PermSample supports 1 <= m <= {MAX_CELLS_M}, got {self.m}")
        reference = list(range(self.m))
        for key, count in self.counts.items():
            if sorted(key) != reference:
                raise ParameterError(f"{key} is not a permutation of 0..{self.m - 1}")
            if count < 0:
                raise ParameterError("counts must be nonnegative")

    @property
    def n_total(self) -> int:
        return sum(self.counts.values())

    @property
    def n_cells(self) -> int:
        return math.factorial(self.m)

    @classmethod
    def from_permutations(cls, perms: Iterable[Sequence[int]], m: Optional[int] = None) -> "PermSample":
        rows = [tuple(int(v) for v in row) for row in perms]
        if m is None:
            if not rows:
                raise ParameterError("cannot infer m from an empty sample")
            m = len(rows[0])
        return cls(m, dict(Counter(rows)))

    def add(self, perm: Sequence[int]) -> None:
        key = tuple(int(v) for v in perm)
        if sorted(key) != list(range(self.m)):
            raise ParameterError(f"{key} is not a permutation of 0..{self.m - 1}")
        self.counts[key] = self.counts.get(key, 0) + 1

    def merge(self, other: "PermSample") -> "PermSample":
        if other.m != self.m:
            raise ParameterError("cannot merge samples of different m")
        merged = Counter(self.counts)
        merged.update(other.counts)
        return PermSample(self.m, dict(merged))

    def cell_counts(self) -> np.ndarray:
        """Counts over all m! cells in lexicographic order, zeros included."""
        return np.array([self.counts.get(p, 0) for p in permutations(range(self.m))], dtype=float)

    def require_samples(self) -> None:
        needed = MIN_SAMPLES_PER_CELL * self.n_cells
        if self.n_total < needed:
            raise UndersampledError(
                f"{self.n_total} samples over {self.n_cells} cells is too few for m={self.m}", needed)


def uniform_reference(m: int) -> np.ndarray:
    return np.full(math.factorial(m), 1.0 / math.factorial(m))


def _tv_from_counts(counts: np.ndarray, n: float) -> np.ndarray:
    cells = counts.shape[-1]
    return 0.5 * np.abs(counts / n - 1.0 / cells).sum(axis=-1)


def tv_to_uniform(sample: PermSample, rng: Optional[np.random.Generator] = None,
                  resamples: int = BOOTSTRAP_RESAMPLES) -> Tuple[float, float]:
    """
    Plug-in total-variation distance to uniform with a bootstrap standard error.

    Args:
        sample: Observed permutations (n_total >= 10·m!)
        rng: Generator for the multinomial bootstrap
        resamples: Number of bootstrap resamples

    Returns:
        (estimate, std_error)

    Raises:
        UndersampledError: If fewer than 10·m! samples were given
    """
    sample.require_samples()
    counts = sample.cell_counts()
    n = sample.n_total
    estimate = float(_tv_from_counts(counts, n))
    rng = rng if rng is not None else np.random.default_rng(0)
    boot = rng.multinomial(n, counts / n, size=resamples)
    return estimate, float(np.std(_tv_from_counts(boot.astype(float), n), ddof=1))


def chi_square_uniformity(sample: PermSample) -> Tuple[float, float]:
    """Pearson statistic against uniform over all m! cells and its chi-square p-value."""
    sample.require_samples()
    result = stats.chisquare(sample.cell_counts())
    return float(result.statistic), float(result.pvalue)


def lis_length(seq: Sequence[int]) -> int:
    """Longest strictly increasing subsequence by patience sorting."""
    piles: list = []
    for value in seq:
        k = bisect_left(piles, value)
        if k == len(piles):
            piles.append(value)
        else:
            piles[k] = value
    return len(piles)


def relative_order(perm: Sequence[int], reference: Sequence[int]) -> np.ndarray:
    """Starting rank of each card, listed in the final order."""
    perm_arr = np.asarray(perm)
    ref = list(reference)
    if sorted(perm_arr.tolist()) != sorted(ref):
        raise ParameterError("perm and reference must arrange the same cards")
    rank = {card: i for i, card in enumerate(ref)}
    return np.array([rank[card] for card in perm_arr.tolist()], dtype=np.int64)


def cayley_distance(rel: np.ndarray) -> int:
    seen = np.zeros(rel.size, dtype=bool)
    cycles = 0
    for start in range(rel.size):
        if not seen[start]:
            cycles += 1
            k = start
            while not seen[k]:
                seen[k] = True
                k = int(rel[k])
    return int(rel.size - cycles)


def spearman_footrule(rel: np.ndarray) -> int:
    return int(np.abs(rel - np.arange(rel.size)).sum())


class PermutationStatistics(NamedTuple):
    top_card_position: int
    bottom_card_position: int
    adjacent_pairs_preserved: int
    cayley_distance: int
    spearman_footrule: int
    lis_length: int


def test_statistics(perm: Sequence[int], reference: Sequence[int]) -> PermutationStatistics:
    """
    Card statistics of a final arrangement against the starting arrangement.

    Both arguments list card labels from top to bottom. Positions are
    1-based. An originally adjacent pair counts as preserved when the two
    cards are still next to each other, in either order.
    """
    rel = relative_order(perm, reference)
    m = rel.size
    where = np.empty(m, dtype=np.int64)
    where[rel] = np.arange(m)
    preserved = int(np.sum(np.abs(np.diff(where)) == 1))
    return PermutationStatistics(
        top_card_position=int(where[0]) + 1,
        bottom_card_position=int(where[-1]) + 1,
        adjacent_pairs_preserved=preserved,
        cayley_distance=cayley_distance(rel),
        spearman_footrule=spearman_footrule(rel),
        lis_length=lis_length(rel.tolist()),
    )


# pytest should not collect the statistic as a test
test_statistics.__test__ = False


class DominanceResult(NamedTuple):
    holds: bool
    max_violation: float
    tolerance: float


def cdf_dominance(samples_a, samples_b, alpha: float = 1e-3) -> DominanceResult:
    """
    Check that a is stochastically dominated by b: F_a(t) >= F_b(t) for all t.

    The largest value of F_b - F_a over the pooled sample points is compared
    with the two-sample DKW tolerance sqrt(ln(1/alpha)/2 · (1/n_a + 1/n_b)).
    """
    a = np.sort(np.asarray(samples_a, dtype=float).reshape(-1))
    b = np.sort(np.asarray(samples_b, dtype=float).reshape(-1))
    if a.size == 0 or b.size == 0:
        raise ParameterError("cdf_dominance needs nonempty samples")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side='right') / a.size
    cdf_b = np.searchsorted(b, grid, side='right') / b.size
    violation = float(np.max(cdf_b - cdf_a))
    tolerance = math.sqrt(math.log(1.0 / alpha) / 2.0 * (1.0 / a.size + 1.0 / b.size))
    return DominanceResult(violation <= tolerance, violation, tolerance)


def ks_to_uniform(samples) -> float:
    """One-sample Kolmogorov-Smirnov distance to U[0, 1]."""
    return float(stats.kstest(np.asarray(samples, dtype=float), 'uniform').statistic)
