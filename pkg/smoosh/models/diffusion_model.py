"""
Reflected jump-diffusion limit of the gather-and-spread model.

Between gathers the m cards follow a driftless diffusion on [0, 1]^{2m} with
state-dependent covariance B = F ⊗ σ²I, reflected coordinate-wise at the
edges of the unit table. Gathers arrive at the epochs of a rate-one Poisson
process with palm centres uniform on D̄.

Coordinates are interleaved (x₁, y₁, x₂, y₂, ...), which is the row order
of the Kronecker product. Local times are kept per card as the columns
(x at 0, x at 1, y at 0, y at 1).
"""

import math
from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from smoosh.core.errors import NumericalError, ParameterError
from smoosh.models.discrete_motion import MotionPath, gather
from smoosh.models.geometry import PositionsLike, Table, as_positions, lens_area, sample_extended, under_palm_mask

EIGEN_TOLERANCE = 1e-12
# Remaining time below this is treated as an epoch boundary.
TIME_EPSILON = 1e-12


@dataclass(frozen=True)
class CovarianceSet:
    """
    Diffusion matrices at one configuration.

    Attributes:
        F: m x m card-overlap covariance
        Sigma: 2 x 2 direction covariance σ²I
        B: 2m x 2m diffusion matrix F ⊗ Σ
        A: Symmetric PSD square root of B
        sqrt_F: Symmetric PSD square root of F (A = sqrt_F ⊗ σI)
        eigenvalues_F: Ascending eigenvalues of F
    """
    F: np.ndarray
    Sigma: np.ndarray
    B: np.ndarray
    A: np.ndarray
    sqrt_F: np.ndarray
    eigenvalues_F: np.ndarray

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues_F[0])


def overlap_matrix(positions: np.ndarray, delta: float, p: float) -> np.ndarray:
    """F_ii = pπδ², F_ij = p²φ(|z_i - z_j|); works on (m, 2) or batched (R, m, 2) input."""
    diff = positions[..., :, None, :] - positions[..., None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    F = p * p * np.asarray(lens_area(dist, delta))
    idx = np.arange(positions.shape[-2])
    F[..., idx, idx] = p * math.pi * delta * delta
    return F


def _psd_root(F: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    evals, evecs = np.linalg.eigh(F)
    if np.any(evals < -EIGEN_TOLERANCE):
        raise NumericalError(f"overlap matrix has eigenvalue {evals.min():.3e} below zero")
    root = np.sqrt(np.clip(evals, 0.0, None))
    return (evecs * root[..., None, :]) @ np.swapaxes(evecs, -1, -2), evals


def build_covariance(positions: PositionsLike, delta: float, p: float, sigma2: float) -> CovarianceSet:
    """
    Assemble F, Σ, B = F ⊗ Σ and A = √B at a configuration.

    Because Σ = σ²I, the square root factorises as A = √F ⊗ σI, so only the
    m x m eigendecomposition of F is needed.

    Raises:
        NumericalError: If F has an eigenvalue below -1e-12
    """
    _check_parameters(delta, p, sigma2)
    pos = as_positions(positions)
    if pos.shape[0] < 1:
        raise ParameterError("build_covariance needs at least one card")
    F = overlap_matrix(pos, delta, p)
    sqrt_F, evals = _psd_root(F)
    sigma_matrix = sigma2 * np.eye(2)
    return CovarianceSet(
        F=F,
        Sigma=sigma_matrix,
        B=np.kron(F, sigma_matrix),
        A=np.kron(sqrt_F, math.sqrt(sigma2) * np.eye(2)),
        sqrt_F=sqrt_F,
        eigenvalues_F=evals,
    )


def _check_parameters(delta: float, p: float, sigma2: float) -> None:
    if not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    if not (0.0 < p < 1.0):
        raise ParameterError(f"p must lie strictly between 0 and 1, got {p}")
    if not sigma2 > 0:
        raise ParameterError(f"sigma2 must be positive, got {sigma2}")


# ========== Skorokhod maps ==========

class SkorokhodResult(NamedTuple):
    reflected: np.ndarray
    lower: np.ndarray
    upper: np.ndarray


def _split_regulator(path: np.ndarray, reflected: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    pushes = np.diff(reflected - path, prepend=0.0)
    return np.cumsum(np.maximum(pushes, 0.0)), np.cumsum(np.maximum(-pushes, 0.0))


def skorokhod_map(path, lo: float = 0.0, hi: float = 1.0) -> SkorokhodResult:
    """
    Two-sided Skorokhod map on [lo, hi], evaluated exactly on the grid.

    First Γ (one-sided at lo): φ = ψ + sup_{s<=t} (lo - ψ(s))⁺.
    Then Λ (upper side): x = φ - M with
    M(t) = sup_{s<=t} [ (φ(s) - hi)⁺ ∧ inf_{u∈[s,t]} φ(u) ], shifted by lo,
    computed by the recursion M_k = min(max(M_{k-1}, (φ_k - a)⁺), φ_k).

    M is not monotone, so the regulators are recovered from the total push
    ν = x - ψ: increments of ν split into the lower (positive) and upper
    (negative) parts.

    Args:
        path: Samples of the free path on an increasing grid
        lo: Lower barrier
        hi: Upper barrier

    Returns:
        SkorokhodResult(reflected, lower, upper)
    """
    if lo >= hi:
        raise ParameterError(f"need lo < hi, got [{lo}, {hi}]")
    psi = np.asarray(path, dtype=float).reshape(-1) - lo
    width = hi - lo
    phi = psi + np.maximum(np.maximum.accumulate(-psi), 0.0)

    m_run = np.empty_like(phi)
    current = -math.inf
    for k, value in enumerate(phi.tolist()):
        current = min(max(current, value - width if value > width else 0.0), value)
        m_run[k] = current
    reflected = np.clip(phi - m_run, 0.0, width) + lo
    lower, upper = _split_regulator(psi + lo, reflected)
    return SkorokhodResult(reflected, lower, upper)


def reflect_stepwise(path, lo: float = 0.0, hi: float = 1.0) -> SkorokhodResult:
    """Grid clamp recursion x_k = clamp(x_{k-1} + Δψ_k), pushes booked to the regulators."""
    if lo >= hi:
        raise ParameterError(f"need lo < hi, got [{lo}, {hi}]")
    psi = np.asarray(path, dtype=float).reshape(-1)
    reflected = np.empty_like(psi)
    lower = np.empty_like(psi)
    upper = np.empty_like(psi)
    x, low_acc, up_acc, prev = 0.0, 0.0, 0.0, 0.0
    for k, value in enumerate(psi.tolist()):
        proposal = value if k == 0 else x + (value - prev)
        x = min(max(proposal, lo), hi)
        push = x - proposal
        if push > 0:
            low_acc += push
        elif push < 0:
            up_acc -= push
        reflected[k], lower[k], upper[k] = x, low_acc, up_acc
        prev = value
    return SkorokhodResult(reflected, lower, upper)


# ========== Single-trajectory integrator ==========

@dataclass(frozen=True)
class DiffusionState:
    z: np.ndarray
    local_times: np.ndarray
    t: float = 0.0

    @property
    def m(self) -> int:
        return self.z.shape[0] // 2

    @property
    def positions(self) -> np.ndarray:
        return self.z.reshape(self.m, 2)

    @classmethod
    def start(cls, positions: PositionsLike, t: float = 0.0) -> "DiffusionState":
        pos = as_positions(positions)
        if np.any(pos < 0.0) or np.any(pos > 1.0):
            raise ParameterError("diffusion positions must lie in the unit square")
        return cls(pos.reshape(-1).copy(), np.zeros((pos.shape[0], 4)), t)


def _book_pushes(local_times: np.ndarray, push: np.ndarray) -> np.ndarray:
    px = push[..., 0::2]
    py = push[..., 1::2]
    booked = local_times.copy()
    booked[..., 0] += np.maximum(px, 0.0)
    booked[..., 1] += np.maximum(-px, 0.0)
    booked[..., 2] += np.maximum(py, 0.0)
    booked[..., 3] += np.maximum(-py, 0.0)
    return booked


def euler_step(state: DiffusionState, dt: float, rng: np.random.Generator,
               delta: float, p: float, sigma2: float) -> DiffusionState:
    """
    One reflected Euler-Maruyama step.

    z' = clamp(z + √dt A(z) ξ) with ξ standard normal in R^{2m}; the clamped
    amount of each coordinate is added to its local time.
    """
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    cov = build_covariance(state.positions, delta, p, sigma2)
    xi = rng.standard_normal(state.z.shape[0])
    proposal = state.z + math.sqrt(dt) * (cov.A @ xi)
    z = np.clip(proposal, 0.0, 1.0)
    return DiffusionState(z, _book_pushes(state.local_times, z - proposal), state.t + dt)


@dataclass(frozen=True)
class DiffusionConfig:
    """
    Parameters of the jump-diffusion on the unit table.

    gather_rate = 0 switches gathering off (pure reflected diffusion).
    """
    delta: float
    p: float
    sigma2: float = 0.5
    dt: float = 1e-3
    gather_rate: float = 1.0

    def __post_init__(self):
        _check_parameters(self.delta, self.p, self.sigma2)
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if self.gather_rate < 0:
            raise ParameterError("gather_rate must be nonnegative")

    @property
    def table(self) -> Table:
        return Table.unit(self.delta)

    @property
    def one_point_coefficient(self) -> float:
        """Diffusion coefficient pπδ²σ² of a lone card."""
        return self.p * math.pi * self.delta ** 2 * self.sigma2

    def next_epoch_gap(self, rng: np.random.Generator) -> float:
        if self.gather_rate == 0:
            return math.inf
        return float(rng.exponential(1.0 / self.gather_rate))


@dataclass(frozen=True)
class GatherEpoch:
    time: float
    w: Tuple[float, float]
    captured: np.ndarray

    def mask_bits(self) -> str:
        return ''.join('1' if c else '0' for c in self.captured)


@dataclass
class JumpDiffusionPath:
    path: MotionPath
    gathers: List[GatherEpoch] = field(default_factory=list)
    final: Optional[DiffusionState] = None


def integrate_until(state: DiffusionState, t_end: float, config: DiffusionConfig,
                    rng: np.random.Generator, record=None) -> DiffusionState:
    """Euler steps of size dt up to t_end, the last one truncated."""
    while t_end - state.t > TIME_EPSILON:
        h = min(config.dt, t_end - state.t)
        state = euler_step(state, h, rng, config.delta, config.p, config.sigma2)
        if record is not None:
            record(state)
    return replace(state, t=max(state.t, t_end)) if math.isfinite(t_end) else state


def apply_gather(state: DiffusionState, w: np.ndarray, table: Table) -> Tuple[DiffusionState, np.ndarray]:
    captured = under_palm_mask(state.positions, w, table.delta)
    gathered = gather(state.positions, w, table)
    return replace(state, z=gathered.reshape(-1)), captured


def jump_diffusion_simulate(config: DiffusionConfig, initial: PositionsLike, horizon: float,
                            rng: np.random.Generator, record_every: int = 1) -> JumpDiffusionPath:
    """
    Integrate the reflected diffusion between rate-one gather epochs.

    Args:
        config: Diffusion parameters
        initial: Starting configuration in the unit square
        horizon: Final time
        rng: Random generator
        record_every: Keep every k-th Euler step in the path (epochs are always kept)

    Returns:
        JumpDiffusionPath with the sampled trajectory and the gather log
    """
    state = DiffusionState.start(initial)
    times = [0.0]
    frames = [state.positions.copy()]
    counter = {'n': 0}

    def record(s: DiffusionState) -> None:
        counter['n'] += 1
        if counter['n'] % record_every == 0:
            times.append(s.t)
            frames.append(s.positions.copy())

    gathers: List[GatherEpoch] = []
    next_epoch = config.next_epoch_gap(rng)
    while next_epoch <= horizon:
        state = integrate_until(state, next_epoch, config, rng, record)
        w = sample_extended(config.table, rng)
        state, captured = apply_gather(state, w, config.table)
        gathers.append(GatherEpoch(next_epoch, (float(w[0]), float(w[1])), captured))
        times.append(state.t)
        frames.append(state.positions.copy())
        next_epoch += config.next_epoch_gap(rng)
    state = integrate_until(state, horizon, config, rng, record)
    if times[-1] != state.t:
        times.append(state.t)
        frames.append(state.positions.copy())
    return JumpDiffusionPath(
        path=MotionPath(times=np.array(times), positions=np.stack(frames), horizon=float(horizon)),
        gathers=gathers,
        final=state,
    )


@dataclass(frozen=True)
class PairMeeting:
    time: float
    epochs: int
    met: bool


def pair_meeting_time(delta: float, p: float, sigma2: float, dt: float, initial_pair: PositionsLike,
                      rng: np.random.Generator, horizon: float = 1e6) -> PairMeeting:
    """
    Time until a gather palm covers both cards of a pair.

    Returns the elapsed time and the number of gather epochs used; when the
    horizon runs out first, met is False and time is the horizon.
    """
    config = DiffusionConfig(delta=delta, p=p, sigma2=sigma2, dt=dt)
    state = DiffusionState.start(initial_pair)
    if state.m != 2:
        raise ParameterError("pair_meeting_time needs exactly two cards")
    epochs = 0
    next_epoch = config.next_epoch_gap(rng)
    while next_epoch <= horizon:
        state = integrate_until(state, next_epoch, config, rng)
        w = sample_extended(config.table, rng)
        state, captured = apply_gather(state, w, config.table)
        epochs += 1
        if captured.all():
            return PairMeeting(next_epoch, epochs, True)
        next_epoch += config.next_epoch_gap(rng)
    return PairMeeting(float(horizon), epochs, False)


def local_time_summary(state: DiffusionState) -> dict:
    lt = state.local_times
    return {
        't': state.t,
        'cards': [
            {'card': j, 'x_lower': float(lt[j, 0]), 'x_upper': float(lt[j, 1]),
             'y_lower': float(lt[j, 2]), 'y_upper': float(lt[j, 3])}
            for j in range(lt.shape[0])
        ],
    }


# ========== Replica-vectorised integrator ==========

class JumpDiffusionBatch:
    """
    Many independent jump-diffusion replicas advanced together.

    Positions have shape (R, m, 2). The noise uses the factorisation
    A = √F ⊗ σI, so x and y increments are √F ξ_x σ√h and √F ξ_y σ√h with
    batched eigendecompositions (closed form for m <= 2).
    """

    def __init__(self, config: DiffusionConfig, positions: np.ndarray, rng: np.random.Generator):
        self.config = config
        self.rng = rng
        self.positions = np.array(positions, dtype=float, copy=True)
        if self.positions.ndim != 3 or self.positions.shape[2] != 2:
            raise ParameterError(f"batch positions must have shape (R, m, 2), got {self.positions.shape}")
        self.local_times = np.zeros(self.positions.shape[:2] + (4,))
        self.t = np.zeros(self.positions.shape[0])

    @property
    def replicas(self) -> int:
        return self.positions.shape[0]

    @property
    def m(self) -> int:
        return self.positions.shape[1]

    def noise_root(self) -> np.ndarray:
        cfg = self.config
        diag = cfg.p * math.pi * cfg.delta ** 2
        if self.m == 1:
            return np.full((self.replicas, 1, 1), math.sqrt(diag))
        if self.m == 2:
            d = self.positions[:, 0, :] - self.positions[:, 1, :]
            off = cfg.p * cfg.p * lens_area(np.hypot(d[:, 0], d[:, 1]), cfg.delta)
            plus = np.sqrt(diag + off)
            minus = np.sqrt(np.clip(diag - off, 0.0, None))
            root = np.empty((self.replicas, 2, 2))
            root[:, 0, 0] = root[:, 1, 1] = 0.5 * (plus + minus)
            root[:, 0, 1] = root[:, 1, 0] = 0.5 * (plus - minus)
            return root
        root, _ = _psd_root(overlap_matrix(self.positions, cfg.delta, cfg.p))
        return root

    def step(self, h: np.ndarray) -> None:
        """Advance replica r by h[r] (zero leaves it untouched)."""
        h = np.broadcast_to(np.asarray(h, dtype=float), (self.replicas,))
        xi = self.rng.standard_normal(self.positions.shape)
        scale = np.sqrt(self.config.sigma2 * h)[:, None, None]
        increments = (self.noise_root() @ xi) * scale
        proposal = self.positions + increments
        clamped = np.clip(proposal, 0.0, 1.0)
        push = clamped - proposal
        self.local_times[..., 0] += np.maximum(push[..., 0], 0.0)
        self.local_times[..., 1] += np.maximum(-push[..., 0], 0.0)
        self.local_times[..., 2] += np.maximum(push[..., 1], 0.0)
        self.local_times[..., 3] += np.maximum(-push[..., 1], 0.0)
        self.positions = clamped
        self.t = self.t + h

    def run_pure(self, horizon: float) -> np.ndarray:
        """Integrate every replica to horizon without gathers; returns final positions."""
        while horizon - self.t[0] > TIME_EPSILON:
            self.step(np.minimum(self.config.dt, horizon - self.t))
        return self.positions

    def gather_replicas(self, rows: np.ndarray) -> np.ndarray:
        """Gather the listed replicas with fresh palm centres; returns the capture masks."""
        table = self.config.table
        w = sample_extended(table, self.rng, rows.size)
        sub = self.positions[rows]
        captured = np.hypot(sub[..., 0] - w[:, None, 0], sub[..., 1] - w[:, None, 1]) <= table.delta
        gx = np.clip(w[:, 0], 0.0, table.width)
        gy = np.clip(w[:, 1], 0.0, table.height)
        sub[..., 0] = np.where(captured, gx[:, None], sub[..., 0])
        sub[..., 1] = np.where(captured, gy[:, None], sub[..., 1])
        self.positions[rows] = sub
        return captured


@dataclass(frozen=True)
class CaptureEstimate:
    captures: int
    epochs: int

    @property
    def frequency(self) -> float:
        return self.captures / self.epochs if self.epochs else 0.0

    @property
    def std_error(self) -> float:
        f = self.frequency
        return math.sqrt(f * (1.0 - f) / self.epochs) if self.epochs else math.inf


def _epoch_loop(batch: JumpDiffusionBatch, epochs_per_replica: int, stop_on_capture: bool,
                horizon: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    rng = batch.rng
    cfg = batch.config
    if cfg.gather_rate <= 0:
        raise ParameterError("an epoch loop needs a positive gather rate")
    R = batch.replicas
    remaining = rng.exponential(1.0 / cfg.gather_rate, size=R)
    epochs = np.zeros(R, dtype=np.int64)
    captures = np.zeros(R, dtype=np.int64)
    meet_time = np.full(R, math.nan)
    active = np.ones(R, dtype=bool)
    while active.any():
        h = np.where(active, np.minimum(cfg.dt, np.minimum(remaining, horizon - batch.t)), 0.0)
        batch.step(np.maximum(h, 0.0))
        remaining = remaining - h
        due = np.flatnonzero(active & (remaining <= TIME_EPSILON))
        active &= batch.t < horizon - TIME_EPSILON
        if due.size:
            captured = batch.gather_replicas(due).all(axis=1)
            epochs[due] += 1
            captures[due] += captured
            remaining[due] = rng.exponential(1.0 / cfg.gather_rate, size=due.size)
            if stop_on_capture:
                hit = due[captured]
                meet_time[hit] = batch.t[hit]
                active[hit] = False
        active &= epochs < epochs_per_replica
    return epochs, captures, meet_time


def capture_frequency(config: DiffusionConfig, epochs: int, replicas: int, rng: np.random.Generator,
                      initial: Optional[PositionsLike] = None) -> CaptureEstimate:
    """
    Fraction of gather epochs whose palm covers both cards of a pair.

    Args:
        config: Diffusion parameters
        epochs: Minimum total number of epochs over all replicas
        replicas: Number of parallel pair trajectories
        rng: Random generator
        initial: Starting pair; defaults to uniform random positions per replica

    Returns:
        CaptureEstimate with counts
    """
    if initial is None:
        start = rng.random((replicas, 2, 2))
    else:
        start = np.broadcast_to(as_positions(initial), (replicas, 2, 2))
    batch = JumpDiffusionBatch(config, start, rng)
    per_replica = -(-epochs // replicas)
    done, captured, _ = _epoch_loop(batch, per_replica, stop_on_capture=False, horizon=math.inf)
    return CaptureEstimate(int(captured.sum()), int(done.sum()))


def pair_meeting_batch(config: DiffusionConfig, initial_pair: PositionsLike, replicas: int,
                       rng: np.random.Generator, horizon: float = 1e6) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorised pair_meeting_time.

    Returns:
        (meeting times, epochs used); meeting time is NaN where the horizon ran out
    """
    start = np.broadcast_to(as_positions(initial_pair), (replicas, 2, 2))
    batch = JumpDiffusionBatch(config, start, rng)
    epochs, _, times = _epoch_loop(batch, np.iinfo(np.int64).max, stop_on_capture=True, horizon=horizon)
    return times, epochs


def one_point_marginals(config: DiffusionConfig, start: Tuple[float, float], horizon: float,
                        replicas: int, rng: np.random.Generator) -> np.ndarray:
    """Positions at horizon of independent lone cards under the pure reflected diffusion."""
    batch = JumpDiffusionBatch(config, np.tile(np.array(start, dtype=float), (replicas, 1, 1)), rng)
    return batch.run_pure(horizon)[:, 0, :]
