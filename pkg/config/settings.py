from dataclasses import dataclass, field
from pathlib import Path
import os

import psutil


def _physical_cores() -> int:
    return psutil.cpu_count(logical=False) or os.cpu_count() or 1


@dataclass
class PoolConfig:
    """
    Replica pool defaults.
    """
    workers: int = field(default_factory=_physical_cores)
    chunk_size: int = 64
    executor: str = 'process'  # 'process' | 'thread'


@dataclass
class NumericsConfig:
    """
    Defaults for the ExperimentConfig fields of the same names that a run leaves unset.
    """
    dt: float = 1e-3
    coupling_horizon: float = 1e6
    bootstrap_resamples: int = 200


@dataclass
class Settings:
    out_dir: Path = field(default_factory=lambda: Path('runs'))
    log_dir: Path = field(default_factory=lambda: Path('logs'))

    pool: PoolConfig = field(default_factory=PoolConfig)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)


def load_settings() -> 'Settings':
    s = Settings()
    # Allow environment variable overrides
    if 'SMOOSH_OUT_DIR' in os.environ:
        s.out_dir = Path(os.getenv('SMOOSH_OUT_DIR'))
    if 'SMOOSH_LOG_DIR' in os.environ:
        s.log_dir = Path(os.getenv('SMOOSH_LOG_DIR'))
    if os.getenv('SMOOSH_WORKERS'):
        s.pool.workers = max(1, int(os.getenv('SMOOSH_WORKERS')))
    if os.getenv('SMOOSH_EXECUTOR') in ('process', 'thread'):
        s.pool.executor = os.getenv('SMOOSH_EXECUTOR')
    return s
