"""
Acceptance Suite

Fixed-seed checks of the closed-form constants, the covariance and
reflection machinery, the one-point laws, the shadow coupling and the
qualitative clustering picture. Each criterion returns a CriterionRow with
measured values, tolerances, runtime and the replica count it used.
"""

import math
import time
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional

import numpy as np
import pandas as pd
from scipy import stats

from config.experiment import PRESETS, ExperimentConfig
from config.settings import Settings, load_settings
from core.storage.fs import ensure_dir
from core.telemetry.logging import RunLogger, get_logger
from smoosh.analysis import constants
from smoosh.analysis.permutation_stats import PermSample, cdf_dominance, chi_square_uniformity
from smoosh.core.base import LabResponse, LabStatus
from smoosh.core.types import CriterionRow
from smoosh.io.exporters import write_csv, write_json
from smoosh.models.diffusion_model import (
    DiffusionConfig,
    build_covariance,
    capture_frequency,
    one_point_marginals,
    pair_meeting_batch,
    reflect_stepwise,
    skorokhod_map,
)
from smoosh.models.discrete_motion import DirectionLaw, GatherMode, ModelConfig, simulate_one_point_batch
from smoosh.models.geometry import Table, lens_integral
from smoosh.models.lattice_1d import LatticeConfig, hit_time_batch, hitting_oracle
from smoosh.runner.experiments import (
    aggregate_curve,
    analysis_rng,
    curve_replica,
    discrete2d_replica,
    run_replicas,
)

DEFAULT_SEED = 20240601


class Criterion(NamedTuple):
    name: str
    check: Callable[[Settings, int], CriterionRow]
    fast: bool


def _row(name: str, passed: bool, measured: Dict, tolerance: Dict, started: float,
         replicas: int = 0) -> CriterionRow:
    return CriterionRow(criterion=name, passed=bool(passed), measured=measured, tolerance=tolerance,
                        runtime_s=time.perf_counter() - started, replicas=int(replicas))


# ========== Closed forms ==========

def check_lens_integral(settings: Settings, seed: int) -> CriterionRow:
    started = time.perf_counter()
    errors = {}
    for delta in (0.3, 0.5, 1.0):
        exact = math.pi * delta ** 4
        errors[str(delta)] = abs(lens_integral(delta) - exact) / exact
    return _row('lens-integral', max(errors.values()) <= 1e-6, {'relative_error': errors},
                {'relative_error': 1e-6}, started)


def check_constant(settings: Settings, seed: int) -> CriterionRow:
    started = time.perf_counter()
    value = constants.frak_p(0.3, 0.5, 0.5)
    k0_errors = {}
    for z in (0.5, 1.0, 5.0, 10.0, 20.0):
        oracle = constants.bessel_k0_quadrature(z)
        k0_errors[str(z)] = abs(float(constants.bessel_k0(z)) - oracle) / oracle
    in_range = 1.82e-7 <= value <= 1.94e-7
    k0_ok = max(k0_errors.values()) <= 1e-10
    return _row('capture-constant', in_range and k0_ok, {'frak_p': value, 'k0_relative_error': k0_errors},
                {'frak_p_range': [1.82e-7, 1.94e-7], 'k0_relative_error': 1e-10}, started)


# ========== Covariance and reflection ==========

def check_ellipticity(settings: Settings, seed: int, configurations: int = 1000) -> CriterionRow:
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_floor = math.inf
    worst_spectrum = 0.0
    worst_root = 0.0
    for _ in range(configurations):
        m = int(rng.integers(1, 6))
        delta = float(rng.uniform(0.05, 0.7))
        p = float(rng.uniform(0.02, 0.98))
        sigma2 = float(rng.uniform(0.1, 1.0))
        positions = rng.random((m, 2))
        if m > 1 and rng.random() < 0.3:
            positions[1] = positions[0]
        cov = build_covariance(positions, delta, p, sigma2)
        floor = p * (1.0 - p) * math.pi * delta ** 2
        worst_floor = min(worst_floor, cov.min_eigenvalue - floor)
        eig_b = np.sort(np.linalg.eigvalsh(cov.B))
        products = np.sort(np.kron(np.linalg.eigvalsh(cov.F), np.linalg.eigvalsh(cov.Sigma)))
        worst_spectrum = max(worst_spectrum, float(np.max(np.abs(eig_b - products))))
        worst_root = max(worst_root, float(np.linalg.norm(cov.A @ cov.A - cov.B) / np.linalg.norm(cov.B)))
    passed = worst_floor >= -1e-9 and worst_spectrum <= 1e-9 and worst_root <= 1e-8
    return _row('ellipticity', passed,
                {'min_eigenvalue_margin': worst_floor, 'spectrum_error': worst_spectrum, 'root_error': worst_root},
                {'min_eigenvalue_margin': -1e-9, 'spectrum_error': 1e-9, 'root_error': 1e-8},
                started, configurations)


def _complementarity_violation(result) -> float:
    d_low = np.diff(result.lower, prepend=0.0)
    d_up = np.diff(result.upper, prepend=0.0)
    low_bad = np.abs(result.reflected[d_low > 1e-12])
    up_bad = np.abs(result.reflected[d_up > 1e-12] - 1.0)
    return float(max(low_bad.max(initial=0.0), up_bad.max(initial=0.0)))


def check_skorokhod(settings: Settings, seed: int, paths: int = 1000) -> CriterionRow:
    started = time.perf_counter()
    t = np.linspace(0.0, 1.0, 101)
    ramp_down = skorokhod_map(-t)
    ramp_up = skorokhod_map(2.0 * t)
    inner = 0.25 + 0.5 * t
    identity = skorokhod_map(inner)
    ramp_error = max(
        float(np.max(np.abs(ramp_down.reflected))),
        float(np.max(np.abs(ramp_down.lower - t))),
        float(np.max(np.abs(ramp_up.reflected - np.minimum(2.0 * t, 1.0)))),
        float(np.max(np.abs(identity.reflected - inner))),
        float(np.max(identity.lower + identity.upper)),
    )

    rng = np.random.default_rng(seed)
    containment = 0.0
    complementarity = 0.0
    monotone = 0.0
    stepwise = 0.0
    for _ in range(paths):
        path = rng.random() + np.cumsum(rng.normal(0.0, 0.1, size=200))
        result = skorokhod_map(path)
        containment = max(containment, float(np.max(np.maximum(-result.reflected, result.reflected - 1.0))))
        complementarity = max(complementarity, _complementarity_violation(result))
        monotone = max(monotone, float(-min(np.diff(result.lower).min(), np.diff(result.upper).min())))
        clamp = reflect_stepwise(path)
        stepwise = max(stepwise, float(np.max(np.abs(clamp.reflected - result.reflected))))
    passed = (ramp_error <= 1e-12 and containment <= 0.0 and complementarity <= 1e-12
              and monotone <= 1e-12 and stepwise <= 1e-10)
    return _row('skorokhod', passed,
                {'ramp_error': ramp_error, 'containment': containment, 'complementarity': complementarity,
                 'regulator_decrease': monotone, 'stepwise_difference': stepwise},
                {'ramp_error': 1e-12, 'containment': 0.0, 'complementarity': 1e-12,
                 'regulator_decrease': 1e-12, 'stepwise_difference': 1e-10},
                started, paths)


# ========== One-point laws ==========

def check_one_point(settings: Settings, seed: int, replicas: int = 100_000) -> CriterionRow:
    """
    Stationary uniformity uses δ=0.7, which mixes well before T=5, and a
    finer step so that the clamp atoms at the walls stay below the KS tolerance.
    """
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    stationary = one_point_marginals(DiffusionConfig(delta=0.7, p=0.5, sigma2=0.5, dt=2.5e-4, gather_rate=0.0),
                                     (0.5, 0.5), 5.0, replicas, rng)
    ks_uniform = float(stats.kstest(stationary[:, 0], 'uniform').statistic)

    discrete = ModelConfig(table=Table.unit(0.3), s0=1e-2, p=0.5, lam=1e4,
                           direction=DirectionLaw.four_axis(), gather_mode=GatherMode.NEVER)
    walk = simulate_one_point_batch(discrete, (0.5, 0.5), 1.0, replicas, rng)
    limit = one_point_marginals(DiffusionConfig(delta=0.3, p=0.5, sigma2=0.5, dt=1e-3, gather_rate=0.0),
                                (0.5, 0.5), 1.0, replicas, rng)
    ks_invariance = float(stats.ks_2samp(walk[:, 0], limit[:, 0]).statistic)
    return _row('one-point', ks_uniform < 0.01 and ks_invariance <= 0.02,
                {'ks_uniform': ks_uniform, 'ks_invariance': ks_invariance},
                {'ks_uniform': 0.01, 'ks_invariance': 0.02}, started, replicas)


# ========== Coupling ==========

def check_sigma_uniformity(settings: Settings, seed: int, replicas: int = 100_000) -> CriterionRow:
    started = time.perf_counter()
    models = {
        'lattice1d': {'model': 'lattice1d', 'N': 8, 'p': 0.5},
        'discrete2d': {'model': 'discrete2d', 'delta': 0.4, 'p': 0.5, 's0': 0.1},
    }
    p_values = {}
    for label, base in models.items():
        for m in (2, 3, 4):
            config = ExperimentConfig(**base, m=m, t_grid=[1.0, 5.0, 20.0], replicas=replicas,
                                      seed=seed + m, outputs=['coupling'])
            records, failures, _ = run_replicas(curve_replica, config, settings, independent_tau=False)
            if failures:
                raise RuntimeError(f"{len(failures)} replicas failed for {label}, m={m}")
            for k, t in enumerate(config.t_grid):
                sample = PermSample.from_permutations([v['sigmas'][k] for _, v in records], m)
                p_values[f"{label}/m={m}/t={t:g}"] = chi_square_uniformity(sample)[1]
    return _row('sigma-uniformity', min(p_values.values()) >= 1e-3, {'p_values': p_values}, {'min_p_value': 1e-3},
                started, replicas)


def check_coupling_inequality(settings: Settings, seed: int, replicas: int = 20_000) -> CriterionRow:
    started = time.perf_counter()
    config = ExperimentConfig(model='discrete2d', m=3, delta=0.4, p=0.5, s0=0.1, replicas=replicas,
                              seed=seed, outputs=['coupling']).with_numerics(settings.numerics)
    records, failures, _ = run_replicas(curve_replica, config, settings)
    if failures:
        raise RuntimeError(f"{len(failures)} replicas failed")
    rows, details = aggregate_curve(config, records, analysis_rng(config))
    slack = {f"{row['t']:g}": row['p_tau_gt_t'] + 3.0 * d['combined_se'] - row['tv']
             for row, d in zip(rows, details)}
    return _row('coupling-inequality', all(d['bound_holds'] for d in details),
                {'curve': rows, 'slack': slack}, {'sigmas': 3.0}, started, replicas)


# ========== Lattice scaling ==========

def check_lattice_scaling(settings: Settings, seed: int, replicas: int = 10_000,
                          oracle_replicas: int = 1_000_000) -> CriterionRow:
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    sizes = (8, 16, 32, 64)
    means = [float(hit_time_batch(LatticeConfig(N, 1, 0.5), 1, N, replicas, rng).mean()) for N in sizes]
    slope = float(stats.linregress(np.log(sizes), np.log(means)).slope)

    config = LatticeConfig(3, 1, 1.0)
    oracle = hitting_oracle(config, 1, 3)
    empirical = float(hit_time_batch(config, 1, 3, oracle_replicas, rng).mean())
    oracle_error = abs(oracle - 18.0) / 18.0
    empirical_error = abs(empirical - 18.0) / 18.0
    passed = 2.6 <= slope <= 3.4 and oracle_error <= 1e-9 and empirical_error <= 0.01
    return _row('lattice-scaling', passed,
                {'slope': slope, 'means': dict(zip(map(str, sizes), means)), 'oracle': oracle,
                 'empirical_N3': empirical},
                {'slope': [2.6, 3.4], 'empirical_relative_error': 0.01}, started, oracle_replicas)


# ========== Stage durations ==========

def check_zeta(settings: Settings, seed: int, samples: int = 1_000_000) -> CriterionRow:
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    measured = {}
    passed = True
    for value in (0.1, 0.3, 0.8):
        zeta = constants.simulate_zeta_abstract(value, rng, size=samples)
        mean = float(zeta.mean())
        se = float(zeta.std(ddof=1) / math.sqrt(samples))
        alpha = value / 2.0
        mgf = float(np.mean(np.exp(alpha * zeta)))
        bound = constants.zeta_moments(value, alpha).mgf_bound
        ok = abs(mean - 1.0 / value) <= 3.0 * se and mgf <= bound
        passed = passed and ok
        measured[str(value)] = {'mean': mean, 'std_error': se, 'mgf': mgf, 'mgf_bound': bound}
    return _row('stage-duration', passed, measured, {'mean_sigmas': 3.0}, started, samples)


def check_capture(settings: Settings, seed: int, epochs: int = 100_000, replicas: int = 1000,
                  pairs: int = 2000) -> CriterionRow:
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    config = DiffusionConfig(delta=0.6, p=0.5, sigma2=0.5, dt=1e-3)
    bound = constants.frak_p(0.6, 0.5, 0.5)
    estimate = capture_frequency(config, epochs, replicas, rng)

    times, _ = pair_meeting_batch(config, [(0.25, 0.5), (0.75, 0.5)], pairs, rng, horizon=1e4)
    times = np.where(np.isnan(times), np.inf, times)
    zeta = constants.simulate_zeta_abstract(bound, rng, size=10 * pairs)
    dominance = cdf_dominance(times, zeta)
    passed = estimate.epochs >= epochs and estimate.frequency >= bound and dominance.holds
    return _row('capture-frequency', passed,
                {'capture_frequency': estimate.frequency, 'epochs': estimate.epochs, 'frak_p': bound,
                 'dominance_violation': dominance.max_violation},
                {'dominance_tolerance': dominance.tolerance}, started, estimate.epochs)


# ========== Clusters ==========

def check_clusters(settings: Settings, seed: int, runs: int = 20) -> CriterionRow:
    started = time.perf_counter()
    config = ExperimentConfig(**{**PRESETS['fig2'], 'outputs': ['clusters'], 'replicas': runs, 'seed': seed})
    records, failures, _ = run_replicas(discrete2d_replica, config, settings)
    if failures:
        raise RuntimeError(f"{len(failures)} runs failed")
    counts = [v['clusters'].n_clusters for _, v in records]
    boundary = [v['clusters'].n_boundary for _, v in records]
    passed = all(20 <= c <= 200 for c in counts) and all(b >= 1 for b in boundary)
    return _row('clusters', passed, {'n_clusters': counts, 'n_boundary': boundary},
                {'n_clusters': [20, 200], 'min_boundary': 1}, started, runs)


CRITERIA: List[Criterion] = [
    Criterion('lens-integral', check_lens_integral, True),
    Criterion('capture-constant', check_constant, True),
    Criterion('ellipticity', check_ellipticity, True),
    Criterion('skorokhod', check_skorokhod, True),
    Criterion('one-point', check_one_point, False),
    Criterion('sigma-uniformity', check_sigma_uniformity, False),
    Criterion('coupling-inequality', check_coupling_inequality, False),
    Criterion('lattice-scaling', check_lattice_scaling, True),
    Criterion('stage-duration', check_zeta, True),
    Criterion('capture-frequency', check_capture, False),
    Criterion('clusters', check_clusters, False),
]


def verify(fast: bool = False, settings: Optional[Settings] = None, out_dir: Optional[Path] = None,
           seed: int = DEFAULT_SEED, only: Optional[List[str]] = None,
           logger: Optional[RunLogger] = None) -> LabResponse:
    """
    Run the acceptance criteria.

    Args:
        fast: Run only the quick subset (closed forms, reflection, lattice scaling, stage durations)
        settings: Process settings (default: load_settings())
        out_dir: When given, write verify_report.csv/json under it
        seed: Master seed for every criterion
        only: Restrict to these criterion names

    Returns:
        LabResponse with data['rows'] (list of CriterionRow); success is
        False if any criterion failed or raised
    """
    settings = settings or load_settings()
    run_id = f"verify-{'fast' if fast else 'full'}-{seed}"
    logger = logger or get_logger(run_id, settings.log_dir)
    selected = [c for c in CRITERIA if (c.fast or not fast) and (only is None or c.name in only)]
    rows: List[CriterionRow] = []
    for criterion in selected:
        started = time.perf_counter()
        try:
            row = criterion.check(settings, seed)
        except Exception as e:
            row = _row(criterion.name, False, {'error': f"{type(e).__name__}: {e}"}, {}, started)
        rows.append(row)
        logger.event('criterion', dict(row))

    failed = [r['criterion'] for r in rows if not r['passed']]
    artifacts = []
    if out_dir is not None:
        report_dir = Path(out_dir) / run_id
        ensure_dir(report_dir)
        table = pd.DataFrame([{k: r[k] for k in ('criterion', 'passed', 'runtime_s', 'replicas')} for r in rows])
        artifacts.append(dict(write_csv(table, report_dir / 'verify_report.csv', 'verify_report')))
        artifacts.append(dict(write_json({'rows': rows, 'failed': failed}, report_dir / 'verify_report.json',
                                         'verify_report')))
    logger.event('run_finished', {'status': 'success' if not failed else 'error', 'failed': failed})

    return LabResponse(
        success=not failed,
        data={'rows': rows, 'failed': failed, 'artifacts': artifacts},
        context={'command': 'verify', 'fast': fast, 'criteria': len(rows)},
        error=f"Failed criteria: {', '.join(failed)}" if failed else None,
        status=LabStatus.SUCCESS if not failed else LabStatus.ERROR,
        trace=[f"{r['criterion']}: {'pass' if r['passed'] else 'FAIL'} ({r['runtime_s']:.2f}s)" for r in rows],
    )
