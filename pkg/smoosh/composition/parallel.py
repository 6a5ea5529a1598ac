"""
Parallel Replica Execution

Runs independent replicas of a simulation on a thread or process pool. Each
replica receives its own generator derived from (seed, replica index), so
results do not depend on the worker count or on completion order.
"""

import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from typing import Any, Callable, Dict, List, Optional, Sequence

import psutil

from smoosh.core.base import LabResponse, LabStatus, utc_timestamp
from smoosh.core.rng import replica_rng

ReplicaFunction = Callable[..., Any]


def default_workers() -> int:
    return psutil.cpu_count(logical=False) or os.cpu_count() or 1


def _run_chunk(fn: ReplicaFunction, seed: int, replicas: Sequence[int], kwargs: Dict[str, Any]) -> List[Dict[str, Any]]:
    """
    Execute a block of replicas in one worker.

    Args:
        fn: Replica function called as fn(replica=r, rng=..., **kwargs)
        seed: Master seed
        replicas: Replica indices in this block
        kwargs: Extra keyword arguments for fn

    Returns:
        One outcome dict per replica
    """
    outcomes = []
    for r in replicas:
        try:
            value = fn(replica=r, rng=replica_rng(seed, r), **kwargs)
            outcomes.append({'replica': r, 'success': True, 'value': value, 'error': None})
        except Exception as e:
            outcomes.append({
                'replica': r,
                'success': False,
                'value': None,
                'error': f"{type(e).__name__}: {e}",
            })
    return outcomes


class ReplicaPool:
    """
    Execute replicas in parallel.

    Example:
        >>> pool = ReplicaPool(max_workers=4, name='hitting')
        >>> response = pool.map(hit_replica, replicas=1000, seed=7, config=cfg)
        >>> values = [r['value'] for r in response.data['results']]
    """

    def __init__(self, max_workers: Optional[int] = None, name: str = None,
                 chunk_size: int = 64, executor: str = 'process'):
        """
        Initialize the pool.

        Args:
            max_workers: Maximum number of concurrent workers (default: physical cores)
            name: Optional name for the replica group
            chunk_size: Replicas per submitted task
            executor: 'process' or 'thread'
        """
        self.max_workers = max_workers or default_workers()
        self.name = name or "unnamed_replicas"
        self.chunk_size = max(1, chunk_size)
        if executor not in ('process', 'thread'):
            raise ValueError(f"executor must be 'process' or 'thread', got '{executor}'")
        self.executor = executor

    def _chunks(self, replicas: int) -> List[range]:
        return [range(start, min(start + self.chunk_size, replicas))
                for start in range(0, replicas, self.chunk_size)]

    def map(self, fn: ReplicaFunction, replicas: int, seed: int, timeout: Optional[float] = None,
            **kwargs) -> LabResponse:
        """
        Run fn for replicas 0..replicas-1.

        Args:
            fn: Picklable top-level replica function
            replicas: Number of replicas
            seed: Master seed
            timeout: Optional timeout in seconds per block
            **kwargs: Passed through to fn

        Returns:
            LabResponse whose data['results'] lists outcomes ordered by replica
        """
        started_at = utc_timestamp()

        if replicas <= 0:
            return LabResponse(
                success=True,
                data={'results': []},
                context={'replica_group': self.name, 'replica_count': 0},
                trace=["No replicas to execute"]
            )

        chunks = self._chunks(replicas)
        results: List[Dict[str, Any]] = []
        if self.max_workers == 1 or len(chunks) == 1:
            for chunk in chunks:
                results.extend(_run_chunk(fn, seed, chunk, kwargs))
        else:
            pool_cls = ProcessPoolExecutor if self.executor == 'process' else ThreadPoolExecutor
            with pool_cls(max_workers=self.max_workers) as executor:
                future_to_chunk = {
                    executor.submit(_run_chunk, fn, seed, list(chunk), kwargs): chunk
                    for chunk in chunks
                }
                for future in as_completed(future_to_chunk, timeout=timeout):
                    chunk = future_to_chunk[future]
                    try:
                        results.extend(future.result(timeout=timeout))
                    except Exception as e:
                        results.extend({
                            'replica': r,
                            'success': False,
                            'value': None,
                            'error': f"Worker failure: {type(e).__name__}: {e}",
                        } for r in chunk)

        results.sort(key=lambda x: x['replica'])
        failed_count = sum(1 for r in results if not r['success'])
        success_count = len(results) - failed_count
        overall_success = failed_count == 0

        return LabResponse(
            success=overall_success,
            data={
                'results': results,
                'started_at': started_at,
                'completed_at': utc_timestamp()
            },
            context={
                'replica_group': self.name,
                'total_replicas': replicas,
                'successful_replicas': success_count,
                'failed_replicas': failed_count,
                'max_workers': self.max_workers
            },
            status=LabStatus.SUCCESS if overall_success else LabStatus.PARTIAL,
            trace=[
                f"Replica group '{self.name}' started with {replicas} replicas in {len(chunks)} blocks",
                f"Executed with max {self.max_workers} {self.executor} workers",
                f"Completed: {success_count} success, {failed_count} failed"
            ],
            error=f"{failed_count} replicas failed" if failed_count > 0 else None
        )

    def __repr__(self) -> str:
        return f"ReplicaPool(name='{self.name}', workers={self.max_workers}, executor='{self.executor}')"
