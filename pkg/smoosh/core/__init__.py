"""
Lab Core Module

Response envelope, shared types, exceptions and replica random streams.
"""

from .base import LabResponse, LabStatus, utc_timestamp
from .errors import (
    EventStreamError,
    NumericalError,
    ParameterError,
    QuadratureError,
    TerminalStateError,
    UndersampledError,
)
from .rng import replica_rng, replica_seed_words
from .types import IndexPair, MeetEvent, PointMotionSource

__all__ = [
    # Responses
    'LabResponse',
    'LabStatus',
    'utc_timestamp',

    # Errors
    'EventStreamError',
    'NumericalError',
    'ParameterError',
    'QuadratureError',
    'TerminalStateError',
    'UndersampledError',

    # Randomness
    'replica_rng',
    'replica_seed_words',

    # Types
    'IndexPair',
    'MeetEvent',
    'PointMotionSource',
]
