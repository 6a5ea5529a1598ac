"""
Lab Response Objects

LabResponse is what runs, replica pools and the acceptance suite hand back
to their callers. Numerical library code raises; orchestration code reports.
"""

from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Dict, List, Optional


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).replace(tzinfo=None).isoformat() + 'Z'


class LabStatus(Enum):
    """Outcome of a run: all replicas fine, some failed, or nothing usable"""
    SUCCESS = "success"
    ERROR = "error"
    PARTIAL = "partial"


@dataclass
class LabResponse:
    """
    Envelope around a run, a replica batch or a verify pass.

    Attributes:
        success: True only when every replica (or criterion) succeeded
        context: Command, run id, model and replica counts
        data: Payload (manifest and run directory, replica outcomes, criterion rows)
        error: Summary of what failed
        trace: Human-readable steps, in order
        status: SUCCESS, PARTIAL (some replicas failed) or ERROR
        metadata: Creation timestamp and phase timings
    """
    success: bool
    context: Dict[str, Any] = field(default_factory=dict)
    data: Any = None
    error: Optional[str] = None
    trace: List[str] = field(default_factory=list)
    status: LabStatus = LabStatus.SUCCESS
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        # a failed response never keeps the default SUCCESS status
        if not self.success and self.status is LabStatus.SUCCESS:
            self.status = LabStatus.ERROR
        self.metadata.setdefault('timestamp', utc_timestamp())

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload['status'] = self.status.value
        return payload

    @classmethod
    def error_response(cls, error: str, context: Optional[Dict[str, Any]] = None,
                       trace: Optional[List[str]] = None, status: LabStatus = LabStatus.ERROR,
                       **metadata) -> "LabResponse":
        """
        Failed response carrying no data.

        Used for invalid configurations (nothing was computed) and for
        artifact-writing failures.
        """
        return cls(success=False, error=error, context=context or {}, trace=trace or [],
                   status=status, metadata=metadata)
