"""Run timing."""

from .metrics import PhaseMetric, RunMetrics

__all__ = ['PhaseMetric', 'RunMetrics']
