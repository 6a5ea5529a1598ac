"""
Shadow-index coupling.

Every card carries a shadow index, a uniformly random permutation π* fixed
at time zero. Whenever the card 𝔦 (smallest index not fixed by π*) meets the
card 𝔧 = π*(𝔦), their shadow indices are swapped so that 𝔧 becomes a fixed
point. Because co-located cards are exchangeable, σ* = π*∘γ is exactly
uniform at every time, and γ itself is uniform once π* is the identity.
The coupling time τ(m) is that moment.

Permutations are zero-based arrays: entry i is the image of i.
"""

import math
from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from smoosh.core.errors import ParameterError, TerminalStateError
from smoosh.core.types import IndexPair, PointMotionSource
from smoosh.models.discrete_motion import rank_to_index

DEFAULT_HORIZON = 1e6


def _check_permutation(values: Sequence[int], m: int) -> Tuple[int, ...]:
    perm = tuple(int(v) for v in values)
    if len(perm) != m or sorted(perm) != list(range(m)):
        raise ParameterError(f"{perm} is not a permutation of 0..{m - 1}")
    return perm


@dataclass(frozen=True)
class ShadowState:
    """
    Coupling bookkeeping.

    Attributes:
        pi_star: Current shadow permutation π*
        tau: Stage times τ(1..k), one per swap so far
    """
    pi_star: Tuple[int, ...]
    tau: Tuple[float, ...] = ()

    @property
    def m(self) -> int:
        return len(self.pi_star)

    @property
    def stage(self) -> int:
        return len(self.tau)

    @property
    def fixed(self) -> FrozenSet[int]:
        return frozenset(i for i, v in enumerate(self.pi_star) if i == v)

    @property
    def terminal(self) -> bool:
        return all(i == v for i, v in enumerate(self.pi_star))

    @property
    def active_i(self) -> Optional[int]:
        for i, v in enumerate(self.pi_star):
            if i != v:
                return i
        return None

    @property
    def active_j(self) -> Optional[int]:
        i = self.active_i
        return None if i is None else self.pi_star[i]

    def eligible_pairs(self) -> List[IndexPair]:
        """All (i, π*_i) with i not fixed, ordered by i."""
        return [(i, v) for i, v in enumerate(self.pi_star) if i != v]

    def as_array(self) -> np.ndarray:
        return np.array(self.pi_star, dtype=np.int64)


def init_shadow(m: int, rng: Optional[np.random.Generator] = None,
                permutation: Optional[Sequence[int]] = None) -> ShadowState:
    """
    Start the coupling with a uniform (or given) shadow permutation.

    Args:
        m: Number of cards
        rng: Generator for the uniform draw; ignored when permutation is given
        permutation: Explicit zero-based shadow permutation

    Returns:
        ShadowState at stage 0 (already terminal when the permutation is the identity)
    """
    if m < 1:
        raise ParameterError(f"m must be at least 1, got {m}")
    if permutation is not None:
        return ShadowState(_check_permutation(permutation, m))
    if rng is None:
        raise ParameterError("init_shadow needs an rng or an explicit permutation")
    return ShadowState(tuple(int(v) for v in rng.permutation(m)))


def record_meet(state: ShadowState, t: float, pair: Optional[IndexPair] = None) -> ShadowState:
    """
    Apply the swap for a meet at time t.

    With pair=(i, j), j = π*_i: π*_j <- j and π*_i <- old π*_j. The default
    pair is the active one (𝔦, 𝔧).

    Raises:
        TerminalStateError: If π* is already the identity
    """
    if state.terminal:
        raise TerminalStateError("shadow permutation is already the identity")
    if state.tau and t < state.tau[-1]:
        raise ParameterError(f"meet time {t} precedes the last stage time {state.tau[-1]}")
    i, j = pair if pair is not None else (state.active_i, state.active_j)
    if state.pi_star[i] != j or i == j:
        raise ParameterError(f"({i}, {j}) is not an eligible pair for {state.pi_star}")
    pi = list(state.pi_star)
    pi[i], pi[j] = pi[j], j
    return ShadowState(tuple(pi), state.tau + (float(t),))


@dataclass(frozen=True)
class CouplingResult:
    """
    Outcome of a coupling run.

    Attributes:
        shadow: Final shadow state (resume from it to continue)
        terminal: Whether π* reached the identity
        horizon: Horizon the run was allowed
        variant: 'standard' or 'fast'
    """
    shadow: ShadowState
    terminal: bool
    horizon: float
    variant: str = 'standard'

    @property
    def tau(self) -> Tuple[float, ...]:
        return self.shadow.tau

    @property
    def pi_star(self) -> Tuple[int, ...]:
        return self.shadow.pi_star

    @property
    def swaps(self) -> int:
        return self.shadow.stage

    @property
    def coupling_time(self) -> float:
        """τ(m); infinite when the horizon ran out first."""
        if not self.terminal:
            return math.inf
        return self.tau[-1] if self.tau else 0.0

    def tau_padded(self, m: Optional[int] = None) -> List[float]:
        """τ(1..m), repeating the last stage time after stopping (inf if not stopped)."""
        m = self.shadow.m if m is None else m
        fill = self.coupling_time
        values = list(self.tau[:m])
        return values + [fill] * (m - len(values))


def couple(source: PointMotionSource, shadow: ShadowState, horizon: float = DEFAULT_HORIZON) -> CouplingResult:
    """
    Run the stage machinery until π* is the identity or the horizon is reached.

    Each stage asks the source for the next meet of the active pair (𝔦, 𝔧),
    which may happen at the current time.
    """
    state = shadow
    while not state.terminal:
        meet = source.advance_until_meet([(state.active_i, state.active_j)], horizon)
        if meet is None:
            break
        state = record_meet(state, meet.time)
    return CouplingResult(state, state.terminal, float(horizon), 'standard')


def couple_fast(source: PointMotionSource, shadow: ShadowState, horizon: float = DEFAULT_HORIZON) -> CouplingResult:
    """
    As couple, but any eligible pair (i, π*_i) may trigger the swap.

    Simultaneous meets resolve to the smallest i.
    """
    state = shadow
    while not state.terminal:
        meet = source.advance_until_meet(state.eligible_pairs(), horizon)
        if meet is None:
            break
        state = record_meet(state, meet.time, pair=meet.pair)
    return CouplingResult(state, state.terminal, float(horizon), 'fast')


def sigma_star(gamma: Sequence[int], pi_star: Sequence[int]) -> np.ndarray:
    """
    σ* = π*∘γ, that is σ_i = π*_{γ_i}.

    Example:
        >>> sigma_star([0, 1, 2, 3], [1, 2, 0, 3])
        array([1, 2, 0, 3])
    """
    g = np.asarray(gamma, dtype=np.int64)
    pi = np.asarray(pi_star, dtype=np.int64)
    if g.shape != pi.shape:
        raise ParameterError("gamma and pi_star must have the same length")
    return pi[g]


@dataclass(frozen=True)
class SigmaSample:
    t: float
    gamma: np.ndarray
    sigma: np.ndarray
    coupled: bool


def sample_sigma_star_grid(source: PointMotionSource, shadow: ShadowState, t_grid: Sequence[float],
                           rng: np.random.Generator, fast: bool = False) -> Tuple[List[SigmaSample], CouplingResult]:
    """
    Observe γ(t) and σ*(t) at increasing times, coupling as the source runs.

    Returns:
        One SigmaSample per grid time and the coupling result at the last time
    """
    runner = couple_fast if fast else couple
    samples: List[SigmaSample] = []
    result = CouplingResult(shadow, shadow.terminal, 0.0, 'fast' if fast else 'standard')
    last = -math.inf
    for t in t_grid:
        if t < last:
            raise ParameterError("t_grid must be nondecreasing")
        last = t
        result = runner(source, result.shadow, t)
        source.advance_to(t)
        gamma = rank_to_index(source.rank_keys(), rng)
        samples.append(SigmaSample(float(t), gamma, sigma_star(gamma, result.pi_star), result.terminal))
    return samples, result


def sample_sigma_star(source: PointMotionSource, shadow: ShadowState, t: float,
                      rng: np.random.Generator, fast: bool = False) -> Tuple[np.ndarray, np.ndarray, CouplingResult]:
    """(γ(t), σ*(t), coupling result up to t) for a single time."""
    samples, result = sample_sigma_star_grid(source, shadow, [t], rng, fast=fast)
    return samples[0].gamma, samples[0].sigma, result
