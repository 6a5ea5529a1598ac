"""
Experiment Runner

Turns an ExperimentConfig into model objects, executes the replicas on a
ReplicaPool and writes CSV/JSON artifacts plus a run manifest. Replica
functions are top-level so that process pools can pickle them; each one
receives its own generator from (seed, replica).
"""

import hashlib
import math
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from config.experiment import COUPLING_MODELS, ExperimentConfig, to_flat_text
from config.metadata_schema import RunManifest, validate_manifest
from config.settings import Settings, load_settings
from core.storage.fs import atomic_write_text, ensure_dir
from core.telemetry.logging import RunLogger, get_logger
from smoosh.analysis.constants import chebyshev_c1, frak_p, simulate_zeta_abstract, zeta_variance
from smoosh.analysis.permutation_stats import (
    BOOTSTRAP_RESAMPLES,
    MIN_SAMPLES_PER_CELL,
    PermSample,
    PermutationStatistics,
    chi_square_uniformity,
    test_statistics,
    tv_to_uniform,
)
from smoosh.composition.parallel import ReplicaPool
from smoosh.core.base import LabResponse, LabStatus, utc_timestamp
from smoosh.core.errors import ParameterError
from smoosh.core.rng import replica_rng, replica_seed_words
from smoosh.core.types import JsonDict
from smoosh.coupling.shadow_coupling import CouplingResult, couple, couple_fast, init_shadow, sample_sigma_star_grid
from smoosh.io.exporters import (
    artifact_list,
    coupling_frame,
    coupling_summary,
    curve_frame,
    events_frame,
    gathers_frame,
    hitting_frame,
    path_frame,
    write_csv,
    write_json,
)
from smoosh.models.diffusion_model import DiffusionConfig, jump_diffusion_simulate, local_time_summary
from smoosh.models.discrete_motion import (
    DirectionLaw,
    GatherMode,
    ModelConfig,
    MotionPath,
    count_clusters,
    rank_to_index,
    simulate,
)
from smoosh.models.geometry import Table
from smoosh.models.lattice_1d import (
    ORACLE_MAX_SITES,
    LatticeConfig,
    LatticeState,
    hit_time,
    hitting_oracle,
    lattice_step,
)
from smoosh.models.sources import DiscreteMotionSource, JumpDiffusionSource, LatticeSource
from smoosh.monitoring.metrics import RunMetrics

CODE_VERSION = '0.1.0'
MANIFEST_NAME = 'manifest.json'
MAX_TV_CARDS = 6
PATH_OUTPUTS = frozenset({'paths', 'events', 'clusters', 'gathers', 'local_times', 'permutations'})

ConfigLike = Union[ExperimentConfig, JsonDict]
Records = List[Tuple[int, JsonDict]]


# ========== Model builders ==========

def discrete_model(config: ExperimentConfig) -> ModelConfig:
    return ModelConfig(
        table=Table(config.width, config.height, config.delta),
        s0=config.s0,
        p=config.p,
        lam=config.lam,
        direction=DirectionLaw.from_name(config.direction),
        gather_mode=GatherMode(config.gather_mode),
    )


def lattice_model(config: ExperimentConfig) -> LatticeConfig:
    return LatticeConfig(N=config.N, m=config.m, p=config.p)


def diffusion_model(config: ExperimentConfig, gathers: bool) -> DiffusionConfig:
    return DiffusionConfig(delta=config.delta, p=config.p, sigma2=config.sigma2, dt=config.dt,
                           gather_rate=1.0 if gathers else 0.0)


def initial_state(config: ExperimentConfig, rng: np.random.Generator) -> np.ndarray:
    """
    Starting configuration: sites (lattice) or an (m, 2) array.

    'spaced' gives distinct x-coordinates so that γ(0) is deterministic.
    """
    m = config.m
    if config.model == 'lattice1d':
        N = config.N
        if config.initial == 'center':
            return np.full(m, (N + 1) // 2, dtype=np.int64)
        if config.initial == 'random':
            return rng.integers(1, N + 1, size=m)
        if m == 1:
            return np.ones(1, dtype=np.int64)
        return 1 + np.rint(np.arange(m) * (N - 1) / (m - 1)).astype(np.int64)
    W, H = config.width, config.height
    if config.initial == 'center':
        return np.tile([W / 2.0, H / 2.0], (m, 1))
    if config.initial == 'random':
        return rng.random((m, 2)) * np.array([W, H])
    xs = (np.arange(m) + 1.0) / (m + 1.0) * W
    return np.column_stack([xs, np.full(m, H / 2.0)])


def make_source(config: ExperimentConfig, initial: np.ndarray, rng: np.random.Generator):
    if config.model == 'discrete2d':
        return DiscreteMotionSource(discrete_model(config), initial, rng)
    if config.model == 'lattice1d':
        return LatticeSource(lattice_model(config), initial, rng)
    if config.model == 'jumpdiffusion':
        return JumpDiffusionSource(diffusion_model(config, gathers=True), initial, rng)
    raise ParameterError(f"model {config.model} has no coupling source")


def _couple(source, config: ExperimentConfig, rng: np.random.Generator,
            horizon: Optional[float] = None) -> CouplingResult:
    shadow = init_shadow(config.m, rng)
    runner = couple_fast if config.coupling == 'fast' else couple
    return runner(source, shadow, config.coupling_horizon if horizon is None else horizon)


def _orders(keys_start, keys_end, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    return rank_to_index(keys_start, rng), rank_to_index(keys_end, rng)


def zeta_parameter(config: ExperimentConfig) -> float:
    return config.zeta_p if config.zeta_p is not None else frak_p(config.delta, config.p, config.sigma2)


def _needs_path(config: ExperimentConfig) -> bool:
    wants = set(config.outputs)
    return bool(wants & PATH_OUTPUTS) or 'coupling' not in wants


# ========== Replica functions ==========

def discrete2d_replica(replica: int, rng: np.random.Generator, config: ExperimentConfig) -> JsonDict:
    model = discrete_model(config)
    initial = initial_state(config, rng)
    wants = set(config.outputs)
    record: JsonDict = {}
    if _needs_path(config):
        path = simulate(model, initial, config.horizon, rng, record_events='events' in wants,
                        record_path='paths' in wants, max_events=config.max_events)
        record['path'] = path if 'paths' in wants else None
        record['events'] = path.events or []
        record['clusters'] = count_clusters(path.final, model.table)
        record['orders'] = _orders(initial[:, 0], path.final[:, 0], rng)
    if 'coupling' in wants:
        record['coupling'] = _couple(DiscreteMotionSource(model, initial, rng), config, rng)
    return record


def lattice1d_replica(replica: int, rng: np.random.Generator, config: ExperimentConfig) -> JsonDict:
    cfg = lattice_model(config)
    sites = initial_state(config, rng)
    wants = set(config.outputs)
    record: JsonDict = {}
    if _needs_path(config):
        state = LatticeState.start(cfg, sites)
        frames = [state.positions.copy()]
        for _ in range(int(config.horizon)):
            state = lattice_step(state, rng, cfg)
            if 'paths' in wants:
                frames.append(state.positions.copy())
        if 'paths' in wants:
            sites_path = np.stack(frames).astype(float)
            record['path'] = MotionPath(
                times=np.arange(len(frames), dtype=float),
                positions=np.stack([sites_path, np.zeros_like(sites_path)], axis=-1),
                horizon=float(state.time),
            )
        record['orders'] = _orders(sites.astype(float), state.positions.astype(float), rng)
    if 'hitting' in wants:
        record['steps'] = hit_time(cfg, config.hit_start, config.target_site, rng)
    if 'coupling' in wants:
        record['coupling'] = _couple(LatticeSource(cfg, sites, rng), config, rng)
    return record


def _diffusion_record(config: ExperimentConfig, rng: np.random.Generator, gathers: bool) -> JsonDict:
    dcfg = diffusion_model(config, gathers)
    initial = initial_state(config, rng)
    wants = set(config.outputs)
    record: JsonDict = {}
    if _needs_path(config):
        result = jump_diffusion_simulate(dcfg, initial, config.horizon, rng, record_every=config.record_every)
        record['path'] = result.path if 'paths' in wants else None
        record['gathers'] = result.gathers
        record['local_times'] = local_time_summary(result.final)
        record['orders'] = _orders(initial[:, 0], result.final.positions[:, 0], rng)
    if 'coupling' in wants:
        record['coupling'] = _couple(JumpDiffusionSource(dcfg, initial, rng), config, rng)
    return record


def diffusion_replica(replica: int, rng: np.random.Generator, config: ExperimentConfig) -> JsonDict:
    return _diffusion_record(config, rng, gathers=False)


def jumpdiffusion_replica(replica: int, rng: np.random.Generator, config: ExperimentConfig) -> JsonDict:
    return _diffusion_record(config, rng, gathers=True)


def zeta_replica(replica: int, rng: np.random.Generator, config: ExperimentConfig) -> JsonDict:
    return {'zeta': float(simulate_zeta_abstract(zeta_parameter(config), rng))}


def curve_replica(replica: int, rng: np.random.Generator, config: ExperimentConfig,
                  independent_tau: bool = True) -> JsonDict:
    """
    γ(t) and σ*(t) on config.t_grid from one coupled run, and τ(m) from a
    second, independent coupling run started at the same configuration.
    """
    initial = initial_state(config, rng)
    source = make_source(config, initial, rng)
    samples, result = sample_sigma_star_grid(source, init_shadow(config.m, rng), config.t_grid, rng,
                                             fast=config.coupling == 'fast')
    record = {
        'gammas': np.stack([s.gamma for s in samples]),
        'sigmas': np.stack([s.sigma for s in samples]),
        'tau_same_run': result.coupling_time,
    }
    if independent_tau:
        other = make_source(config, initial, rng)
        record['tau'] = _couple(other, config, rng, horizon=max(config.t_grid)).coupling_time
    return record


REPLICA_FUNCTIONS: Dict[str, Callable[..., JsonDict]] = {
    'discrete2d': discrete2d_replica,
    'lattice1d': lattice1d_replica,
    'diffusion': diffusion_replica,
    'jumpdiffusion': jumpdiffusion_replica,
    'zeta_abstract': zeta_replica,
}


# ========== Aggregation ==========

def analysis_rng(config: ExperimentConfig) -> np.random.Generator:
    """Stream for bootstrap resampling, disjoint from every replica stream."""
    return replica_rng(config.seed, config.replicas)


def _mean_se(values: Sequence[float]) -> Dict[str, float]:
    arr = np.asarray(values, dtype=float)
    se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return {'mean': float(arr.mean()), 'std_error': se, 'n': int(arr.size)}


def permutation_report(orders: Sequence[Tuple[np.ndarray, np.ndarray]], m: int,
                       rng: np.random.Generator, resamples: int = BOOTSTRAP_RESAMPLES) -> JsonDict:
    """
    Uniformity of the final rank-to-index permutations and card statistics.

    TV and the chi-square test need m <= 6 and at least 10·m! samples;
    otherwise they are reported as None.
    """
    report: JsonDict = {'m': m, 'n_total': len(orders), 'tv': None, 'tv_se': None,
                              'chi2': None, 'p_value': None}
    if orders and m <= MAX_TV_CARDS and len(orders) >= MIN_SAMPLES_PER_CELL * math.factorial(m):
        sample = PermSample.from_permutations([end for _, end in orders], m)
        report['tv'], report['tv_se'] = tv_to_uniform(sample, rng, resamples)
        report['chi2'], report['p_value'] = chi_square_uniformity(sample)
    if orders:
        rows = [test_statistics(end, start) for start, end in orders]
        report['statistics'] = {
            name: _mean_se([getattr(row, name) for row in rows]) for name in PermutationStatistics._fields
        }
    return report


def summarize(config: ExperimentConfig, records: Records) -> JsonDict:
    """Deterministic per-run summary (no timings)."""
    values = [v for _, v in records]
    summary: JsonDict = {'model': config.model, 'replicas_succeeded': len(values), 'm': config.m}
    if not values:
        return summary
    if 'clusters' in values[0]:
        counts = [v['clusters'].n_clusters for v in values]
        boundary = [v['clusters'].n_boundary for v in values]
        summary['clusters'] = {'n_clusters': _mean_se(counts), 'n_boundary': _mean_se(boundary),
                               'min_clusters': int(min(counts)), 'max_clusters': int(max(counts))}
    if 'steps' in values[0]:
        summary['hitting'] = _mean_se([v['steps'] for v in values])
        summary['hitting']['start'] = config.hit_start
        summary['hitting']['target'] = config.target_site
        if config.N <= ORACLE_MAX_SITES:
            summary['hitting']['oracle'] = hitting_oracle(lattice_model(config), config.hit_start, config.target_site)
    if 'coupling' in values[0]:
        summary['coupling'] = coupling_summary([v['coupling'] for v in values], config.m)
    if 'gathers' in values[0] and config.model == 'jumpdiffusion':
        epochs = [g for v in values for g in v['gathers']]
        full = sum(1 for g in epochs if bool(np.all(g.captured)))
        summary['gathers'] = {'epochs': len(epochs),
                              'all_captured_frequency': full / len(epochs) if epochs else None}
        if config.m == 2 and config.delta <= 1:
            summary['gathers']['frak_p'] = frak_p(config.delta, config.p, config.sigma2)
    if 'local_times' in values[0]:
        walls = np.array([[[c['x_lower'], c['x_upper'], c['y_lower'], c['y_upper']]
                           for c in v['local_times']['cards']] for v in values])
        summary['local_times'] = {'mean_per_wall': walls.mean(axis=(0, 1)).tolist(),
                                  'walls': ['x_lower', 'x_upper', 'y_lower', 'y_upper']}
    if 'zeta' in values[0]:
        zetas = [v['zeta'] for v in values]
        value = zeta_parameter(config)
        summary['zeta'] = {**_mean_se(zetas), 'frak_p': value, 'expected_mean': 1.0 / value}
        if len(zetas) > 1:
            b2 = zeta_variance(zetas)
            summary['zeta'].update({'variance': b2, 'c1': chebyshev_c1(b2)})
    if 'orders' in values[0]:
        summary['permutations'] = permutation_report([v['orders'] for v in values], config.m,
                                                     analysis_rng(config), config.bootstrap_resamples)
    return summary


def write_run_artifacts(config: ExperimentConfig, records: Records, run_dir: Path) -> List[JsonDict]:
    wants = set(config.outputs)
    artifacts = []
    if 'paths' in wants:
        frame = path_frame((r, v['path']) for r, v in records if v.get('path') is not None)
        artifacts.append(write_csv(frame, run_dir / 'paths.csv', 'paths'))
    if 'events' in wants:
        artifacts.append(write_csv(events_frame((r, v['events']) for r, v in records),
                                   run_dir / 'events.csv', 'events'))
    if 'hitting' in wants:
        artifacts.append(write_csv(hitting_frame([(r, v['steps']) for r, v in records]),
                                   run_dir / 'hitting.csv', 'hitting'))
    if 'coupling' in wants:
        results = [(r, v['coupling']) for r, v in records]
        artifacts.append(write_csv(coupling_frame(results), run_dir / 'coupling.csv', 'coupling'))
        artifacts.append(write_json(coupling_summary([c for _, c in results], config.m),
                                    run_dir / 'coupling_summary.json', 'coupling_summary'))
    if 'gathers' in wants:
        artifacts.append(write_csv(gathers_frame((r, v['gathers']) for r, v in records),
                                   run_dir / 'gathers.csv', 'gathers'))
    if 'local_times' in wants:
        payload = {'replicas': [{'replica': r, **v['local_times']} for r, v in records]}
        artifacts.append(write_json(payload, run_dir / 'local_times.json', 'local_times'))
    if 'clusters' in wants:
        payload = {'replicas': [{'replica': r, **v['clusters'].to_dict()} for r, v in records]}
        artifacts.append(write_json(payload, run_dir / 'clusters.json', 'clusters'))
    if 'samples' in wants:
        frame = pd.DataFrame([(r, v['zeta']) for r, v in records], columns=['replica', 'zeta'])
        artifacts.append(write_csv(frame, run_dir / 'samples.csv', 'samples'))
    if 'permutations' in wants:
        report = permutation_report([v['orders'] for _, v in records], config.m, analysis_rng(config),
                                    config.bootstrap_resamples)
        artifacts.append(write_json(report, run_dir / 'permutations.json', 'permutations'))
    if 'summary' in wants:
        artifacts.append(write_json(summarize(config, records), run_dir / 'summary.json', 'summary'))
    return artifact_list(artifacts)


def aggregate_curve(config: ExperimentConfig, records: Records,
                    rng: np.random.Generator) -> Tuple[List[Dict[str, float]], List[JsonDict]]:
    """
    Mixing-curve rows (t, tv, tv_se, p_tau_gt_t) and per-t diagnostics.

    The diagnostics carry the binomial standard error of P(τ > t), the
    combined standard error, whether tv <= p_tau_gt_t + 3·combined SE, and
    the chi-square uniformity test of σ*(t).
    """
    m = config.m
    values = [v for _, v in records]
    taus = np.array([v['tau'] for v in values], dtype=float)
    n = taus.size
    rows, details = [], []
    for k, t in enumerate(config.t_grid):
        gammas = PermSample.from_permutations([v['gammas'][k] for v in values], m)
        sigmas = PermSample.from_permutations([v['sigmas'][k] for v in values], m)
        tv, tv_se = tv_to_uniform(gammas, rng, config.bootstrap_resamples)
        p_gt = float(np.mean(taus > t))
        p_se = math.sqrt(p_gt * (1.0 - p_gt) / n)
        combined = math.sqrt(tv_se ** 2 + p_se ** 2)
        chi2, p_value = chi_square_uniformity(sigmas)
        rows.append({'t': float(t), 'tv': tv, 'tv_se': tv_se, 'p_tau_gt_t': p_gt})
        details.append({'t': float(t), 'p_tau_se': p_se, 'combined_se': combined,
                        'bound_holds': bool(tv <= p_gt + 3.0 * combined),
                        'sigma_chi2': chi2, 'sigma_p_value': p_value})
    return rows, details


def write_curve_artifacts(config: ExperimentConfig, records: Records, run_dir: Path) -> List[JsonDict]:
    rows, details = aggregate_curve(config, records, analysis_rng(config))
    artifacts = [
        write_csv(curve_frame(rows), run_dir / 'mixing_curve.csv', 'mixing_curve'),
        write_json({'m': config.m, 'model': config.model, 'replicas': len(records), 'points': details},
                   run_dir / 'mixing_summary.json', 'mixing_summary'),
    ]
    return artifact_list(artifacts)


# ========== Execution ==========

def run_identifier(command: str, config: ExperimentConfig) -> str:
    digest = hashlib.sha256(to_flat_text(config).encode('utf-8')).hexdigest()[:10]
    return f"{command}-{config.model}-{digest}"


def _resolve(config: ConfigLike) -> ExperimentConfig:
    if isinstance(config, ExperimentConfig):
        return config
    return ExperimentConfig(**config)


def run_replicas(fn: Callable[..., Any], config: ExperimentConfig, settings: Settings,
                 **kwargs) -> Tuple[Records, List[JsonDict], LabResponse]:
    """
    Execute fn for every replica of config.

    Returns:
        (successful records in replica order, failures, pool response)
    """
    config = config.with_numerics(settings.numerics)
    pool = ReplicaPool(max_workers=settings.pool.workers, name=f"{config.model}_replicas",
                       chunk_size=settings.pool.chunk_size, executor=settings.pool.executor)
    response = pool.map(fn, config.replicas, config.seed, config=config, **kwargs)
    outcomes = response.data['results']
    records = [(o['replica'], o['value']) for o in outcomes if o['success']]
    failures = [{'replica': o['replica'], 'error': o['error']} for o in outcomes if not o['success']]
    return records, failures, response


def _execute(command: str, config: ExperimentConfig, replica_fn: Callable[..., Any],
             writer: Callable[[ExperimentConfig, Records, Path], List[JsonDict]],
             settings: Optional[Settings], out_dir: Optional[Path], logger: Optional[RunLogger]) -> LabResponse:
    settings = settings or load_settings()
    config = config.with_numerics(settings.numerics)
    run_id = run_identifier(command, config)
    run_dir = Path(out_dir if out_dir is not None else settings.out_dir) / run_id
    logger = logger or get_logger(run_id, settings.log_dir)
    metrics = RunMetrics()
    started = time.perf_counter()

    logger.event('config', {'command': command, 'config': config.to_flat_dict()})
    logger.event('replicas_started', {'replicas': config.replicas, 'workers': settings.pool.workers,
                                      'executor': settings.pool.executor})
    with metrics.timer('replicas', replicas=config.replicas):
        records, failures, pool_response = run_replicas(replica_fn, config, settings)
    for failure in failures:
        logger.event('replica_failed', failure)

    ensure_dir(run_dir)
    artifacts: List[JsonDict] = []
    if records:
        try:
            with metrics.timer('artifacts'):
                artifacts = writer(config, records, run_dir)
        except Exception as e:
            logger.event('run_finished', {'status': 'error', 'error': str(e)})
            return LabResponse.error_response(
                f"Artifact writing failed: {type(e).__name__}: {e}",
                context={'command': command, 'run_id': run_id},
                trace=pool_response.trace,
            )
    for artifact in artifacts:
        logger.event('artifact_written', artifact)

    status = LabStatus.SUCCESS if not failures else (LabStatus.PARTIAL if records else LabStatus.ERROR)
    if config.replicas == 0:
        status = LabStatus.SUCCESS
    manifest = RunManifest(
        run_id=run_id,
        command=command,
        code_version=CODE_VERSION,
        created_at=utc_timestamp(),
        status=status.value,
        config=config.to_flat_dict(),
        seed=config.seed,
        replicas=config.replicas,
        replica_seeds=replica_seed_words(config.seed, config.replicas),
        wall_clock_s=time.perf_counter() - started,
        workers=settings.pool.workers,
        artifacts=artifacts,
        failures=failures,
    )
    validate_manifest(manifest.to_dict())
    atomic_write_text(run_dir / MANIFEST_NAME, manifest.to_json())
    logger.event('manifest_written', {'path': str(run_dir / MANIFEST_NAME), 'artifacts': len(artifacts)})
    logger.event('run_finished', {'status': status.value, 'timings': metrics.get_statistics()})

    return LabResponse(
        success=status is LabStatus.SUCCESS,
        data={'manifest': manifest, 'run_dir': str(run_dir)},
        context={'command': command, 'run_id': run_id, 'model': config.model, 'replicas': config.replicas},
        error=f"{len(failures)} replicas failed" if failures else None,
        trace=pool_response.trace + [f"Wrote {len(artifacts)} artifacts to {run_dir}"],
        status=status,
        metadata={'metrics': metrics.get_statistics()},
    )


def run(config: ConfigLike, settings: Optional[Settings] = None, out_dir: Optional[Path] = None,
        logger: Optional[RunLogger] = None) -> LabResponse:
    """
    Run an experiment and write its artifacts and manifest.

    Args:
        config: ExperimentConfig or a dict of its fields
        settings: Process settings (default: load_settings())
        out_dir: Parent directory of the run directory (default: settings.out_dir)
        logger: Run logger (default: one under settings.log_dir)

    Returns:
        LabResponse with data['manifest'] and data['run_dir']; an ERROR
        response without any computation when the config is invalid

    Example:
        >>> response = run({'model': 'lattice1d', 'replicas': 10, 'outputs': ['hitting']})
        >>> response.data['manifest'].artifacts[0]['kind']
        'hitting'
    """
    try:
        cfg = _resolve(config)
    except (ValidationError, ParameterError) as e:
        return LabResponse.error_response(f"Invalid configuration: {e}", context={'command': 'simulate'})
    return _execute('simulate', cfg, REPLICA_FUNCTIONS[cfg.model], write_run_artifacts, settings, out_dir, logger)


def couple_experiment(config: ConfigLike, settings: Optional[Settings] = None, out_dir: Optional[Path] = None,
                      logger: Optional[RunLogger] = None) -> LabResponse:
    """Coupling runs only: coupling.csv, coupling_summary.json and summary.json."""
    try:
        base = _resolve(config)
        cfg = ExperimentConfig(**{**base.model_dump(), 'outputs': ['coupling', 'summary']})
    except (ValidationError, ParameterError) as e:
        return LabResponse.error_response(f"Invalid configuration: {e}", context={'command': 'couple'})
    return _execute('couple', cfg, REPLICA_FUNCTIONS[cfg.model], write_run_artifacts, settings, out_dir, logger)


def mixing_curve(config: ConfigLike, t_grid: Optional[Sequence[float]] = None, settings: Optional[Settings] = None,
                 out_dir: Optional[Path] = None, logger: Optional[RunLogger] = None) -> LabResponse:
    """
    Estimate TV(γ(t), uniform) and P(τ(m) > t) on a time grid.

    Args:
        config: Experiment config; model must support coupling and m <= 6
        t_grid: Nondecreasing times (default: config.t_grid)

    Returns:
        LabResponse whose manifest lists mixing_curve.csv and mixing_summary.json
    """
    try:
        base = _resolve(config)
        grid = list(t_grid) if t_grid is not None else list(base.t_grid)
        cfg = ExperimentConfig(**{**base.model_dump(), 't_grid': grid})
        if cfg.m > MAX_TV_CARDS:
            raise ParameterError(f"mixing_curve estimates TV only for m <= {MAX_TV_CARDS}, got {cfg.m}")
        if cfg.model not in COUPLING_MODELS:
            raise ParameterError(f"mixing_curve needs one of {COUPLING_MODELS}, got {cfg.model}")
        if not grid:
            raise ParameterError("t_grid must not be empty")
        needed = MIN_SAMPLES_PER_CELL * math.factorial(cfg.m)
        if cfg.replicas < needed:
            raise ParameterError(f"mixing_curve needs at least {needed} replicas for m={cfg.m}")
    except (ValidationError, ParameterError) as e:
        return LabResponse.error_response(f"Invalid configuration: {e}", context={'command': 'mixing-curve'})
    return _execute('mixing-curve', cfg, curve_replica, write_curve_artifacts, settings, out_dir, logger)
