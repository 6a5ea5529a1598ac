"""
Tabular and JSON artifact writers.

Frames are built in replica order and written with round-trip float
precision, so file digests depend only on the values.
"""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from core.storage.fs import atomic_write_text, file_sha256
from smoosh.core.types import ArtifactRecord
from smoosh.coupling.shadow_coupling import CouplingResult
from smoosh.models.diffusion_model import GatherEpoch
from smoosh.models.discrete_motion import EventAtom, MotionPath

FLOAT_FORMAT = '%.17g'

PATH_COLUMNS = ['replica', 'time', 'card', 'x', 'y']
EVENT_COLUMNS = ['replica', 'time', 'wx', 'wy', 'theta', 'gather', 'coins']
HITTING_COLUMNS = ['replica', 'steps']
COUPLING_COLUMNS = ['replica', 'stage', 'tau_k']
GATHER_COLUMNS = ['replica', 'time', 'wx', 'wy', 'captured']
CURVE_COLUMNS = ['t', 'tv', 'tv_se', 'p_tau_gt_t']


def path_frame(paths: Iterable[Tuple[int, MotionPath]]) -> pd.DataFrame:
    """Long format: one row per (replica, jump time, card)."""
    blocks = []
    for replica, path in paths:
        k, m = path.times.size, path.m
        blocks.append(pd.DataFrame({
            'replica': np.full(k * m, replica, dtype=np.int64),
            'time': np.repeat(path.times, m),
            'card': np.tile(np.arange(m, dtype=np.int64), k),
            'x': path.positions[:, :, 0].reshape(-1),
            'y': path.positions[:, :, 1].reshape(-1),
        }))
    if not blocks:
        return pd.DataFrame(columns=PATH_COLUMNS)
    return pd.concat(blocks, ignore_index=True)[PATH_COLUMNS]


def events_frame(events: Iterable[Tuple[int, Sequence[EventAtom]]]) -> pd.DataFrame:
    rows = [
        (replica, atom.time, atom.center.x, atom.center.y, atom.angle, int(atom.gather_flag), atom.coin_bits())
        for replica, atoms in events for atom in atoms
    ]
    return pd.DataFrame(rows, columns=EVENT_COLUMNS)


def hitting_frame(steps: Sequence[Tuple[int, int]]) -> pd.DataFrame:
    return pd.DataFrame(list(steps), columns=HITTING_COLUMNS)


def coupling_frame(results: Iterable[Tuple[int, CouplingResult]]) -> pd.DataFrame:
    """Stage times τ(1..k) of every replica; unfinished runs list only the stages reached."""
    rows = [(replica, stage, tau) for replica, result in results
            for stage, tau in enumerate(result.tau, start=1)]
    return pd.DataFrame(rows, columns=COUPLING_COLUMNS)


def gathers_frame(gathers: Iterable[Tuple[int, Sequence[GatherEpoch]]]) -> pd.DataFrame:
    rows = [(replica, g.time, g.w[0], g.w[1], g.mask_bits()) for replica, epochs in gathers for g in epochs]
    return pd.DataFrame(rows, columns=GATHER_COLUMNS)


def curve_frame(rows: Sequence[Dict[str, float]]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=CURVE_COLUMNS)


def coupling_summary(results: Sequence[CouplingResult], m: int) -> Dict[str, Any]:
    """Mean and quantiles of τ(m) over terminal runs, plus the terminal fraction."""
    finished = np.array([r.coupling_time for r in results if r.terminal], dtype=float)
    summary: Dict[str, Any] = {
        'm': m,
        'replicas': len(results),
        'terminal_fraction': (finished.size / len(results)) if results else 0.0,
    }
    if finished.size:
        q = np.quantile(finished, [0.1, 0.5, 0.9])
        summary.update({
            'tau_mean': float(finished.mean()),
            'tau_std_error': float(finished.std(ddof=1) / np.sqrt(finished.size)) if finished.size > 1 else 0.0,
            'tau_q10': float(q[0]), 'tau_q50': float(q[1]), 'tau_q90': float(q[2]),
        })
    return summary


def write_csv(frame: pd.DataFrame, path: Path, kind: str) -> ArtifactRecord:
    text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    atomic_write_text(Path(path), text)
    return ArtifactRecord(kind=kind, path=Path(path).name, sha256=file_sha256(path), rows=int(len(frame)))


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None if np.isnan(value) else ('inf' if value > 0 else '-inf')
    return value


def write_json(payload: Dict[str, Any], path: Path, kind: str) -> ArtifactRecord:
    text = json.dumps(_jsonable(payload), ensure_ascii=False, sort_keys=True, indent=2) + '\n'
    atomic_write_text(Path(path), text)
    rows = len(payload) if isinstance(payload, dict) else 0
    return ArtifactRecord(kind=kind, path=Path(path).name, sha256=file_sha256(path), rows=rows)


def artifact_list(records: List[ArtifactRecord]) -> List[Dict[str, Any]]:
    return [dict(r) for r in records]
