"""Experiment runner and acceptance suite."""

from .experiments import couple_experiment, mixing_curve, run
from .acceptance import verify

__all__ = ['run', 'couple_experiment', 'mixing_curve', 'verify']
