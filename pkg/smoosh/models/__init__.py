"""
Motion models: table geometry, the discrete 2D model, the 1D lattice chain,
the reflected jump-diffusion limit, and coupling sources wrapping them.
"""

from .geometry import Point2, Table, clamp, lens_area, lens_integral
from .discrete_motion import DirectionLaw, EventAtom, GatherMode, ModelConfig, MotionPath, rank_to_index, simulate
from .lattice_1d import LatticeConfig, LatticeState, hit_time, hitting_oracle, lattice_step
from .diffusion_model import DiffusionConfig, DiffusionState, build_covariance, euler_step, skorokhod_map
from .sources import DiscreteMotionSource, JumpDiffusionSource, LatticeSource

__all__ = [
    # Geometry
    'Point2',
    'Table',
    'clamp',
    'lens_area',
    'lens_integral',

    # Discrete model
    'DirectionLaw',
    'EventAtom',
    'GatherMode',
    'ModelConfig',
    'MotionPath',
    'rank_to_index',
    'simulate',

    # Lattice
    'LatticeConfig',
    'LatticeState',
    'hit_time',
    'hitting_oracle',
    'lattice_step',

    # Diffusion
    'DiffusionConfig',
    'DiffusionState',
    'build_covariance',
    'euler_step',
    'skorokhod_map',

    # Sources
    'DiscreteMotionSource',
    'JumpDiffusionSource',
    'LatticeSource',
]
