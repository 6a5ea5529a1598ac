"""
Point-motion sources for the coupling engine.

Each source wraps one replica of a motion model and answers "run until one of
these pairs shares a position". Meets are exact equality of positions,
which in all three models only co-gathering (or a shared lattice site) can
produce.
"""

import math
from typing import Optional, Sequence

import numpy as np

from smoosh.core.types import IndexPair, MeetEvent
from smoosh.models.diffusion_model import DiffusionConfig, DiffusionState, apply_gather, integrate_until
from smoosh.models.discrete_motion import EventStream, ModelConfig, step
from smoosh.models.geometry import PositionsLike, as_positions, sample_extended
from smoosh.models.lattice_1d import LatticeConfig, LatticeState, lattice_step


def _first_meeting(positions: np.ndarray, pairs: Sequence[IndexPair]) -> Optional[IndexPair]:
    for i, j in pairs:
        if np.array_equal(positions[i], positions[j]):
            return (i, j)
    return None


class LatticeSource:
    """Lattice chain in unit steps; horizons are step counts."""

    def __init__(self, config: LatticeConfig, sites, rng: np.random.Generator):
        self.config = config
        self.rng = rng
        self.state = LatticeState.start(config, sites)

    @property
    def time(self) -> float:
        return float(self.state.time)

    @property
    def m(self) -> int:
        return self.config.m

    def advance_until_meet(self, pairs: Sequence[IndexPair], horizon: float) -> Optional[MeetEvent]:
        while True:
            hit = _first_meeting(self.state.positions, pairs)
            if hit is not None:
                return MeetEvent(self.time, hit)
            if self.state.time + 1 > horizon:
                return None
            self.state = lattice_step(self.state, self.rng, self.config)

    def advance_to(self, t: float) -> None:
        while self.state.time + 1 <= t:
            self.state = lattice_step(self.state, self.rng, self.config)

    def rank_keys(self) -> np.ndarray:
        return self.state.positions.astype(float)


class DiscreteMotionSource:
    """Continuous-time discrete gather-and-spread model."""

    def __init__(self, config: ModelConfig, initial: PositionsLike, rng: np.random.Generator):
        self.config = config
        self.positions = as_positions(initial)
        self.stream = EventStream(rng, config, self.positions.shape[0])
        self._time = 0.0

    @property
    def time(self) -> float:
        return self._time

    @property
    def m(self) -> int:
        return self.positions.shape[0]

    def _apply_next(self) -> None:
        atom = self.stream.pop()
        self.positions = step(self.positions, atom, self.config)
        self._time = atom.time

    def advance_until_meet(self, pairs: Sequence[IndexPair], horizon: float) -> Optional[MeetEvent]:
        hit = _first_meeting(self.positions, pairs)
        if hit is not None:
            return MeetEvent(self._time, hit)
        while self.stream.peek().time <= horizon:
            self._apply_next()
            hit = _first_meeting(self.positions, pairs)
            if hit is not None:
                return MeetEvent(self._time, hit)
        self._time = max(self._time, float(horizon))
        return None

    def advance_to(self, t: float) -> None:
        while self.stream.peek().time <= t:
            self._apply_next()
        self._time = max(self._time, float(t))

    def rank_keys(self) -> np.ndarray:
        return self.positions[:, 0].copy()


class JumpDiffusionSource:
    """
    Reflected jump-diffusion; meets are looked for only at gather epochs.

    Positions are compared only at the start and right after each gather, so
    a coincidence at a gather epoch (a shared corner included) is reported
    while one that arises and ends between epochs is not.
    """

    def __init__(self, config: DiffusionConfig, initial: PositionsLike, rng: np.random.Generator):
        self.config = config
        self.rng = rng
        self.state = DiffusionState.start(initial)
        self.next_epoch = config.next_epoch_gap(rng)
        self._at_epoch = True
        self.epochs = 0

    @property
    def time(self) -> float:
        return self.state.t

    @property
    def m(self) -> int:
        return self.state.m

    def _run_to(self, t: float) -> None:
        if t - self.state.t > 0:
            self.state = integrate_until(self.state, t, self.config, self.rng)
            self._at_epoch = False

    def _gather(self) -> None:
        self._run_to(self.next_epoch)
        w = sample_extended(self.config.table, self.rng)
        self.state, _ = apply_gather(self.state, w, self.config.table)
        self.epochs += 1
        self._at_epoch = True
        self.next_epoch += self.config.next_epoch_gap(self.rng)

    def advance_until_meet(self, pairs: Sequence[IndexPair], horizon: float) -> Optional[MeetEvent]:
        if self._at_epoch:
            hit = _first_meeting(self.state.positions, pairs)
            if hit is not None:
                return MeetEvent(self.state.t, hit)
        while math.isfinite(self.next_epoch) and self.next_epoch <= horizon:
            self._gather()
            hit = _first_meeting(self.state.positions, pairs)
            if hit is not None:
                return MeetEvent(self.state.t, hit)
        if math.isfinite(horizon):
            self._run_to(horizon)
        return None

    def advance_to(self, t: float) -> None:
        while math.isfinite(self.next_epoch) and self.next_epoch <= t:
            self._gather()
        self._run_to(t)

    def rank_keys(self) -> np.ndarray:
        return self.state.positions[:, 0].copy()
