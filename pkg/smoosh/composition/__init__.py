"""Replica-parallel execution."""

from .parallel import ReplicaPool, default_workers

__all__ = ['ReplicaPool', 'default_workers']
