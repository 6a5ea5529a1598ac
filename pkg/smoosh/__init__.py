"""
Smoosh Module

Gather-and-spread motion models, the shadow-index coupling, closed-form
constants and permutation statistics, plus the replica runner.
"""

__version__ = "0.1.0"
