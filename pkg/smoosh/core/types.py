"""
Shared Type Definitions

Type aliases, records and protocols shared between the motion models, the
coupling engine and the runner.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Protocol, Sequence, Tuple, TypedDict, runtime_checkable

import numpy as np


# ========== Type Aliases ==========

JsonDict = Dict[str, Any]
"""JSON-compatible dictionary"""

IndexPair = Tuple[int, int]
"""Zero-based (card, card) pair"""


# ========== Records ==========

@dataclass(frozen=True)
class MeetEvent:
    """
    A designated pair of cards observed at the same position.

    Attributes:
        time: Model time of the observation
        pair: The zero-based (i, j) pair that met
    """
    time: float
    pair: IndexPair


# ========== Protocols ==========

@runtime_checkable
class PointMotionSource(Protocol):
    """
    Contract between an exchangeable m-point motion and the coupling engine.

    Implementors must leave the law of the motion invariant under swapping the
    coordinate processes of two cards that share a position. This is a
    documented contract, checked statistically by the test-suite only.
    """

    @property
    def time(self) -> float:
        ...

    @property
    def m(self) -> int:
        ...

    def advance_until_meet(self, pairs: Sequence[IndexPair], horizon: float) -> Optional[MeetEvent]:
        """
        Evolve until some listed pair shares a position, or until horizon.

        The check includes the current state, so a meet at the current time
        is reported without advancing. When several pairs meet at the same
        instant, the pair listed first wins. Returns None when the horizon is
        reached with no meet; the source is then positioned at the horizon.
        """
        ...

    def advance_to(self, t: float) -> None:
        ...

    def rank_keys(self) -> np.ndarray:
        """Per-card keys (x-coordinates) used to build the rank-to-index permutation."""
        ...


# ========== TypedDict Definitions ==========

class CriterionRow(TypedDict):
    """One row of the acceptance report."""
    criterion: str
    passed: bool
    measured: JsonDict
    tolerance: JsonDict
    runtime_s: float
    replicas: int


class ArtifactRecord(TypedDict):
    kind: str
    path: str
    sha256: str
    rows: int


__all__ = [
    'JsonDict',
    'IndexPair',
    'MeetEvent',
    'PointMotionSource',
    'CriterionRow',
    'ArtifactRecord',
]
