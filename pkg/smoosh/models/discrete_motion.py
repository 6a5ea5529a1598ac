"""
Discrete gather-and-spread m-point motion.

Palm events arrive as a Poisson point process on time x D̄. Each event first
(optionally) gathers every card under the palm to the clamped palm centre,
then every card under the palm whose coin came up heads is dragged a distance
s0 in the event's direction, coordinates clamped to the table.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from smoosh.core.errors import NumericalError, ParameterError
from smoosh.models.geometry import (
    PointLike,
    Point2,
    PositionsLike,
    Table,
    as_positions,
    as_xy,
    clamp_center_xy,
    sample_extended,
    under_palm_mask,
)

CLOSED_FORM_MOMENT_TOLERANCE = 1e-12
CUSTOM_MOMENT_TOLERANCE = 1e-9


class DirectionKind(Enum):
    CONTINUOUS_UNIFORM = "continuous_uniform"
    FOUR_AXIS = "four_axis"
    CUSTOM = "custom"


@dataclass(frozen=True)
class DirectionLaw:
    """
    Law ν₀ of the spread direction θ.

    Must be unbiased: the means of cos θ, sin θ and sin θ cos θ vanish and
    cos²θ, sin²θ share the mean σ² > 0. Checked at construction.
    """
    kind: DirectionKind
    atoms: Tuple[Tuple[float, float], ...] = ()
    sigma2: float = field(init=False)

    def __post_init__(self):
        if self.kind is DirectionKind.CONTINUOUS_UNIFORM:
            moments = {'cos': 0.0, 'sin': 0.0, 'sincos': 0.0, 'cos2': 0.5, 'sin2': 0.5}
            tolerance = CLOSED_FORM_MOMENT_TOLERANCE
        else:
            if not self.atoms:
                raise ParameterError(f"{self.kind.value} direction law needs atoms")
            angles = np.array([a for a, _ in self.atoms], dtype=float)
            weights = np.array([w for _, w in self.atoms], dtype=float)
            if np.any(weights < 0) or not math.isclose(weights.sum(), 1.0, abs_tol=CUSTOM_MOMENT_TOLERANCE):
                raise ParameterError("direction weights must be nonnegative and sum to one")
            c, s = np.cos(angles), np.sin(angles)
            moments = {
                'cos': float(weights @ c),
                'sin': float(weights @ s),
                'sincos': float(weights @ (s * c)),
                'cos2': float(weights @ (c * c)),
                'sin2': float(weights @ (s * s)),
            }
            tolerance = (CLOSED_FORM_MOMENT_TOLERANCE if self.kind is DirectionKind.FOUR_AXIS
                         else CUSTOM_MOMENT_TOLERANCE)

        for key in ('cos', 'sin', 'sincos'):
            if abs(moments[key]) > tolerance:
                raise ParameterError(f"direction law is biased: mean of {key} is {moments[key]:.3e}")
        if abs(moments['cos2'] - moments['sin2']) > tolerance or moments['cos2'] <= 0:
            raise ParameterError("direction law must give cos²θ and sin²θ the same positive mean")
        object.__setattr__(self, 'sigma2', moments['cos2'])

    @classmethod
    def uniform(cls) -> "DirectionLaw":
        return cls(DirectionKind.CONTINUOUS_UNIFORM)

    @classmethod
    def four_axis(cls) -> "DirectionLaw":
        return cls(DirectionKind.FOUR_AXIS, tuple((k * math.pi / 2, 0.25) for k in range(4)))

    @classmethod
    def custom(cls, atoms: Sequence[Tuple[float, float]]) -> "DirectionLaw":
        return cls(DirectionKind.CUSTOM, tuple((float(a) % (2 * math.pi), float(w)) for a, w in atoms))

    @classmethod
    def from_name(cls, name: str) -> "DirectionLaw":
        if name == DirectionKind.CONTINUOUS_UNIFORM.value:
            return cls.uniform()
        if name == DirectionKind.FOUR_AXIS.value:
            return cls.four_axis()
        raise ParameterError(f"unknown direction law '{name}'")

    def sample(self, rng: np.random.Generator, size: Optional[int] = None):
        if self.kind is DirectionKind.CONTINUOUS_UNIFORM:
            return rng.uniform(0.0, 2 * math.pi, size=size)
        angles = np.array([a for a, _ in self.atoms])
        if self.kind is DirectionKind.FOUR_AXIS:
            return angles[rng.integers(0, len(angles), size=size)]
        weights = np.array([w for _, w in self.atoms])
        return rng.choice(angles, size=size, p=weights / weights.sum())


class GatherMode(Enum):
    EVERY_EVENT = "every_event"
    RARE_GATHER = "rare_gather"
    NEVER = "never"


@dataclass(frozen=True)
class ModelConfig:
    """
    Parameters of the discrete model.

    Attributes:
        table: Table and palm radius
        s0: Spread distance
        p: Probability that a card under the palm follows the spread
        lam: Rate λ of the palm-event process per unit area of D̄
        direction: Law of the spread direction
        gather_mode: Whether events gather (always, with probability 1/λ, never)
    """
    table: Table
    s0: float
    p: float
    lam: float = 1.0
    direction: DirectionLaw = field(default_factory=DirectionLaw.four_axis)
    gather_mode: GatherMode = GatherMode.EVERY_EVENT

    def __post_init__(self):
        if not (self.s0 > 0 and math.isfinite(self.s0)):
            raise ParameterError(f"s0 must be positive, got {self.s0}")
        if not (0.0 < self.p < 1.0):
            raise ParameterError(f"p must lie strictly between 0 and 1, got {self.p}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ParameterError(f"lam must be positive, got {self.lam}")
        if self.gather_mode is GatherMode.RARE_GATHER and self.lam < 1.0:
            raise ParameterError("rare gathering needs lam >= 1 so that 1/lam is a probability")

    @classmethod
    def diffusion_scaled(cls, n: float, table: Table, p: float,
                         direction: Optional[DirectionLaw] = None) -> "ModelConfig":
        """λ = n, s0 = 1/√n, gathers with probability 1/n."""
        return cls(table=table, s0=1.0 / math.sqrt(n), p=p, lam=float(n),
                   direction=direction or DirectionLaw.four_axis(),
                   gather_mode=GatherMode.RARE_GATHER)

    @property
    def event_rate(self) -> float:
        return self.lam * self.table.extended_area

    @property
    def gather_probability(self) -> float:
        if self.gather_mode is GatherMode.EVERY_EVENT:
            return 1.0
        if self.gather_mode is GatherMode.RARE_GATHER:
            return 1.0 / self.lam
        return 0.0


@dataclass(frozen=True)
class EventAtom:
    time: float
    center: Point2
    angle: float
    coins: np.ndarray
    gather_flag: bool

    def coin_bits(self) -> str:
        return ''.join('1' if c else '0' for c in self.coins)


@dataclass
class MotionPath:
    """
    Piecewise-constant, right-continuous card trajectories.

    Attributes:
        times: Jump times, starting with 0.0, shape (k + 1,)
        positions: Configuration after each jump, shape (k + 1, m, 2)
        events: The atoms that produced the jumps, when recorded
        horizon: Time up to which the path is valid
    """
    times: np.ndarray
    positions: np.ndarray
    events: Optional[List[EventAtom]] = None
    horizon: float = 0.0

    @property
    def m(self) -> int:
        return int(self.positions.shape[1])

    @property
    def final(self) -> np.ndarray:
        return self.positions[-1]

    def at(self, t: float) -> np.ndarray:
        if t < self.times[0]:
            raise ParameterError(f"path starts at {self.times[0]}, asked for {t}")
        idx = int(np.searchsorted(self.times, t, side='right')) - 1
        return self.positions[idx]


def gather(positions: PositionsLike, w: PointLike, table: Table) -> np.ndarray:
    """
    Gather every card under the palm to the clamped palm centre.

    Args:
        positions: Current configuration
        w: Palm centre in D̄
        table: The table

    Returns:
        New (m, 2) configuration

    Example:
        >>> gather([(0.6, 0.6), (0.9, 0.9)], (0.5, 0.5), Table.unit(0.2))
        array([[0.5, 0.5],
               [0.9, 0.9]])
    """
    pos = as_positions(positions)
    gx, gy = clamp_center_xy(w, table)
    if pos.shape[0] == 0:
        return pos
    mask = under_palm_mask(pos, w, table.delta)
    pos[mask, 0] = gx
    pos[mask, 1] = gy
    return pos


def spread(positions: PositionsLike, w: PointLike, angle: float, s0: float,
           coins: Sequence[bool], table: Table) -> np.ndarray:
    """
    Drag every card under the palm whose coin is heads by s0 in direction angle.

    Each coordinate is clamped to the table separately, so a card that reaches
    an edge keeps sliding along it.
    """
    pos = as_positions(positions)
    coin_arr = np.asarray(coins, dtype=bool).reshape(-1)
    if coin_arr.shape[0] != pos.shape[0]:
        raise ParameterError(f"need one coin per card, got {coin_arr.shape[0]} for {pos.shape[0]} cards")
    clamp_center_xy(w, table)
    if pos.shape[0] == 0:
        return pos
    mask = under_palm_mask(pos, w, table.delta) & coin_arr
    if mask.any():
        pos[mask, 0] = np.clip(pos[mask, 0] + s0 * math.cos(angle), 0.0, table.width)
        pos[mask, 1] = np.clip(pos[mask, 1] + s0 * math.sin(angle), 0.0, table.height)
    return pos


def step(positions: PositionsLike, atom: EventAtom, config: ModelConfig) -> np.ndarray:
    """Apply one event: gather (when flagged) then spread, at the same palm centre."""
    pos = as_positions(positions)
    if atom.coins.shape[0] != pos.shape[0]:
        raise ParameterError("atom coins do not match the number of cards")
    if atom.gather_flag:
        pos = gather(pos, atom.center, config.table)
    return spread(pos, atom.center, atom.angle, config.s0, atom.coins, config.table)


def next_event(rng: np.random.Generator, config: ModelConfig, m: int, last_time: float = 0.0) -> EventAtom:
    """
    Draw the next palm event after last_time.

    Draw order (fixed, for reproducibility): inter-arrival, centre, angle,
    coins, gather flag.
    """
    dt = rng.exponential(1.0 / config.event_rate)
    center = sample_extended(config.table, rng)
    angle = float(config.direction.sample(rng))
    coins = rng.random(m) < config.p
    if config.gather_mode is GatherMode.EVERY_EVENT:
        gather_flag = True
    elif config.gather_mode is GatherMode.RARE_GATHER:
        gather_flag = bool(rng.random() < 1.0 / config.lam)
    else:
        gather_flag = False
    return EventAtom(
        time=last_time + float(dt),
        center=Point2(float(center[0]), float(center[1])),
        angle=angle,
        coins=coins,
        gather_flag=gather_flag,
    )


class EventStream:
    """
    Lookahead over next_event.

    Lets a simulation stop at a horizon and resume later without losing the
    first atom beyond the horizon.
    """

    def __init__(self, rng: np.random.Generator, config: ModelConfig, m: int):
        self.rng = rng
        self.config = config
        self.m = m
        self._pending: Optional[EventAtom] = None
        self._last_time = 0.0

    def peek(self) -> EventAtom:
        if self._pending is None:
            self._pending = next_event(self.rng, self.config, self.m, self._last_time)
        return self._pending

    def pop(self) -> EventAtom:
        atom = self.peek()
        self._pending = None
        self._last_time = atom.time
        return atom


def _check_contained(positions: np.ndarray, table: Table) -> None:
    if not table.contains(positions):
        raise NumericalError("a card left the table")


def simulate(config: ModelConfig, initial: PositionsLike, horizon: float, rng: np.random.Generator,
             record_events: bool = False, record_path: bool = True,
             max_events: Optional[int] = None) -> MotionPath:
    """
    Run the m-point motion over all atoms with time <= horizon.

    Args:
        config: Model parameters
        initial: Starting configuration, inside the table
        horizon: Final time
        rng: Random generator
        record_events: Keep the atoms for the event-log export
        record_path: Keep every jump (False keeps only the start and the end)
        max_events: Stop after this many atoms even if horizon is not reached

    Returns:
        MotionPath valid on [0, horizon]
    """
    pos = as_positions(initial)
    if not config.table.contains(pos):
        raise ParameterError("initial positions must lie on the table")
    m = pos.shape[0]

    times = [0.0]
    frames = [pos.copy()]
    events: List[EventAtom] = []
    stream = EventStream(rng, config, m)
    count = 0
    last_time = 0.0
    truncated = False
    while stream.peek().time <= horizon:
        if max_events is not None and count >= max_events:
            truncated = True
            break
        atom = stream.pop()
        pos = step(pos, atom, config)
        _check_contained(pos, config.table)
        count += 1
        last_time = atom.time
        if record_events:
            events.append(atom)
        if record_path:
            times.append(atom.time)
            frames.append(pos.copy())

    if not record_path and count:
        times.append(last_time)
        frames.append(pos.copy())
    end = last_time if truncated else horizon
    return MotionPath(
        times=np.array(times),
        positions=np.stack(frames),
        events=events if record_events else None,
        horizon=float(end),
    )


def rank_to_index(xs: Sequence[float], rng: np.random.Generator) -> np.ndarray:
    """
    Rank-to-index permutation γ: γ[i] is the card holding the i-th smallest key.

    Ties are broken by fresh i.i.d. uniforms drawn on every call.

    Example:
        >>> rank_to_index([0.2, 0.7, 0.4], np.random.default_rng(0))
        array([0, 2, 1])
    """
    keys = np.asarray(xs, dtype=float).reshape(-1)
    if keys.size < 1:
        raise ParameterError("rank_to_index needs at least one key")
    u = rng.random(keys.size)
    return np.lexsort((u, keys))


def simulate_one_point_batch(config: ModelConfig, start: PointLike, horizon: float,
                             replicas: int, rng: np.random.Generator) -> np.ndarray:
    """
    Final positions of many independent single cards.

    Only atoms whose palm covers the card move it. Because the card sits on
    the table, its whole palm disc lies in D̄, so covering atoms form a Poisson
    process of rate λπδ² with centres uniform on the disc around the card.

    Returns:
        Array of shape (replicas, 2)
    """
    table = config.table
    sx, sy = as_xy(start)
    z = np.tile(np.array([sx, sy], dtype=float), (replicas, 1))
    if replicas == 0:
        return z
    delta = table.delta
    counts = rng.poisson(config.lam * math.pi * delta * delta * horizon, size=replicas)
    gather_p = config.gather_probability
    for k in range(int(counts.max())):
        active = counts > k
        radius = delta * np.sqrt(rng.random(replicas))
        phi = rng.uniform(0.0, 2 * math.pi, size=replicas)
        angle = config.direction.sample(rng, size=replicas)
        coins = rng.random(replicas) < config.p
        gathers = rng.random(replicas) < gather_p
        wx = z[:, 0] + radius * np.cos(phi)
        wy = z[:, 1] + radius * np.sin(phi)

        g = active & gathers
        z[g, 0] = np.clip(wx[g], 0.0, table.width)
        z[g, 1] = np.clip(wy[g], 0.0, table.height)

        mv = active & coins
        z[mv, 0] = np.clip(z[mv, 0] + config.s0 * np.cos(angle[mv]), 0.0, table.width)
        z[mv, 1] = np.clip(z[mv, 1] + config.s0 * np.sin(angle[mv]), 0.0, table.height)
    return z


@dataclass(frozen=True)
class ClusterSummary:
    """
    Heaps of cards at exactly equal positions.

    Attributes:
        n_clusters: Number of distinct occupied positions
        n_boundary: Clusters with a coordinate on a table edge
        sizes: Cluster sizes, largest first
    """
    n_clusters: int
    n_boundary: int
    sizes: Tuple[int, ...]

    def to_dict(self) -> dict:
        return {'n_clusters': self.n_clusters, 'n_boundary': self.n_boundary, 'sizes': list(self.sizes)}


def count_clusters(positions: PositionsLike, table: Table) -> ClusterSummary:
    pos = as_positions(positions)
    if pos.shape[0] == 0:
        return ClusterSummary(0, 0, ())
    unique, counts = np.unique(pos, axis=0, return_counts=True)
    on_edge = ((unique[:, 0] == 0.0) | (unique[:, 0] == table.width)
               | (unique[:, 1] == 0.0) | (unique[:, 1] == table.height))
    return ClusterSummary(
        n_clusters=int(unique.shape[0]),
        n_boundary=int(on_edge.sum()),
        sizes=tuple(int(c) for c in sorted(counts, reverse=True)),
    )


def swap_paths(path: MotionPath, i: int, j: int) -> MotionPath:
    """Exchange the trajectories of cards i and j."""
    order = np.arange(path.m)
    order[[i, j]] = order[[j, i]]
    return MotionPath(times=path.times.copy(), positions=path.positions[:, order, :].copy(),
                      events=path.events, horizon=path.horizon)
