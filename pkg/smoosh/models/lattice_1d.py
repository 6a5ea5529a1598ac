"""
One-dimensional lattice warm-up model.

m cards on sites 1..N. Each step picks a site uniformly and a direction by a
fair coin; every card on that site tosses its own Bernoulli(p) coin and the
heads move one site in the chosen direction, staying put at the ends.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from smoosh.core.errors import NumericalError, ParameterError

ORACLE_MAX_SITES = 10_000


@dataclass(frozen=True)
class LatticeConfig:
    N: int
    m: int
    p: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ParameterError(f"N must be an integer >= 2, got {self.N}")
        if int(self.m) != self.m or self.m < 1:
            raise ParameterError(f"m must be an integer >= 1, got {self.m}")
        if not (0.0 < self.p <= 1.0):
            raise ParameterError(f"p must lie in (0, 1], got {self.p}")

    @property
    def move_probability(self) -> float:
        """Probability that a given card moves left (or right) in one step, away from the ends."""
        return self.p / (2.0 * self.N)

    def check_site(self, site: int) -> int:
        if not (1 <= site <= self.N):
            raise ParameterError(f"site {site} is outside 1..{self.N}")
        return int(site)


@dataclass(frozen=True)
class LatticeState:
    """Card sites (1-based) and the step counter."""
    positions: np.ndarray
    time: int = 0

    @classmethod
    def start(cls, config: LatticeConfig, sites) -> "LatticeState":
        arr = np.asarray(sites, dtype=np.int64).reshape(-1)
        if arr.shape[0] != config.m:
            raise ParameterError(f"expected {config.m} sites, got {arr.shape[0]}")
        if np.any(arr < 1) or np.any(arr > config.N):
            raise ParameterError(f"sites must lie in 1..{config.N}")
        return cls(arr.copy(), 0)


def lattice_step(state: LatticeState, rng: np.random.Generator, config: LatticeConfig) -> LatticeState:
    """
    One step of the lattice chain.

    Draw order: site, direction, then one coin per card.
    """
    site = int(rng.integers(1, config.N + 1))
    direction = -1 if rng.random() < 0.5 else 1
    coins = rng.random(config.m) < config.p
    movers = (state.positions == site) & coins
    positions = state.positions.copy()
    if movers.any():
        positions[movers] = np.clip(positions[movers] + direction, 1, config.N)
    return LatticeState(positions, state.time + 1)


def hit_time(config: LatticeConfig, start: int, target: int, rng: np.random.Generator) -> int:
    """
    Steps a single card needs to first reach target.

    A lone card is activated (its site picked and its coin heads) with
    probability p/N per step, so the wait between activations is geometric.
    """
    pos = config.check_site(start)
    target = config.check_site(target)
    activation = config.p / config.N
    steps = 0
    while pos != target:
        steps += int(rng.geometric(activation))
        pos = min(max(pos + (-1 if rng.random() < 0.5 else 1), 1), config.N)
    return steps


def hit_time_batch(config: LatticeConfig, start: int, target: int, replicas: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Vectorised hit_time over independent replicas."""
    start = config.check_site(start)
    target = config.check_site(target)
    activation = config.p / config.N
    pos = np.full(replicas, start, dtype=np.int64)
    steps = np.zeros(replicas, dtype=np.int64)
    running = pos != target
    while running.any():
        idx = np.flatnonzero(running)
        steps[idx] += rng.geometric(activation, size=idx.size)
        moves = np.where(rng.random(idx.size) < 0.5, -1, 1)
        pos[idx] = np.clip(pos[idx] + moves, 1, config.N)
        running[idx] = pos[idx] != target
    return steps


def hitting_oracle(config: LatticeConfig, start: int, target: int) -> float:
    """
    Exact expected hitting time from the first-step equations.

    h_target = 0 and, for every other site i,
    (1 - P_ii) h_i - q h_{i-1} - q h_{i+1} = 1 with q = p/(2N).
    The system is tridiagonal and is solved in banded form.

    Raises:
        NumericalError: If the system is singular
    """
    start = config.check_site(start)
    target = config.check_site(target)
    if config.N > ORACLE_MAX_SITES:
        raise ParameterError(f"hitting_oracle supports N <= {ORACLE_MAX_SITES}")
    if start == target:
        return 0.0

    n = config.N
    q = config.move_probability
    t = target - 1
    neighbours = np.full(n, 2.0)
    neighbours[0] = neighbours[-1] = 1.0

    bands = np.zeros((3, n))
    bands[1] = q * neighbours
    bands[0, 1:] = -q
    bands[2, :-1] = -q
    rhs = np.ones(n)

    bands[1, t] = 1.0
    rhs[t] = 0.0
    if t + 1 < n:
        bands[0, t + 1] = 0.0
    if t - 1 >= 0:
        bands[2, t - 1] = 0.0

    try:
        h = linalg.solve_banded((1, 1), bands, rhs)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"hitting system is singular: {exc}") from exc
    return float(h[start - 1])
