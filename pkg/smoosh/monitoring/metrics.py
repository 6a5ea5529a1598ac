"""
Run Metrics

Wall-clock timing of run phases (replica execution, artifact writing,
acceptance criteria).
"""

import statistics
import time
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional

from smoosh.core.base import utc_timestamp


@dataclass
class PhaseMetric:
    """A single timed phase"""
    timestamp: str
    phase: str
    duration_ms: float
    success: bool
    replicas: int = 0
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class RunMetrics:
    """
    Collect phase timings for one run.

    Example:
        >>> metrics = RunMetrics()
        >>> with metrics.timer('replicas', replicas=100):
        ...     pass
        >>> metrics.total_seconds() >= 0
        True
    """

    def __init__(self):
        self.metrics: List[PhaseMetric] = []
        self._by_phase = defaultdict(list)

    def track_phase(self, phase: str, duration_ms: float, success: bool = True,
                    replicas: int = 0, error: Optional[str] = None) -> None:
        metric = PhaseMetric(
            timestamp=utc_timestamp(),
            phase=phase,
            duration_ms=duration_ms,
            success=success,
            replicas=replicas,
            error=error
        )
        self.metrics.append(metric)
        self._by_phase[phase].append(metric)

    @contextmanager
    def timer(self, phase: str, replicas: int = 0):
        """Time the enclosed block; failures are recorded and re-raised."""
        start = time.perf_counter()
        try:
            yield
        except Exception as e:
            self.track_phase(phase, (time.perf_counter() - start) * 1000, False, replicas, str(e))
            raise
        self.track_phase(phase, (time.perf_counter() - start) * 1000, True, replicas)

    def total_seconds(self) -> float:
        return sum(m.duration_ms for m in self.metrics) / 1000.0

    def get_statistics(self, phase: Optional[str] = None) -> Dict[str, Any]:
        """
        Summary statistics of the recorded durations.

        Args:
            phase: Optional filter by phase

        Returns:
            Dictionary with count, success rate and duration statistics
        """
        selected = self._by_phase.get(phase, []) if phase else self.metrics
        if not selected:
            return {'count': 0, 'phase': phase}
        durations = [m.duration_ms for m in selected]
        return {
            'count': len(selected),
            'phase': phase,
            'success_rate': sum(1 for m in selected if m.success) / len(selected),
            'total_ms': sum(durations),
            'mean_ms': statistics.mean(durations),
            'median_ms': statistics.median(durations),
            'max_ms': max(durations),
            'replicas': sum(m.replicas for m in selected),
        }
