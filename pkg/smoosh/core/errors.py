"""Exceptions raised by the numerical layers."""

from typing import Optional


class ParameterError(ValueError):
    """A parameter lies outside the domain an operation accepts."""


class EventStreamError(ValueError):
    """A palm centre outside the extended domain reached the dynamics."""


class TerminalStateError(ValueError):
    """A meet was recorded on a shadow state that has already stopped."""


class UndersampledError(ValueError):
    """Too few samples for the requested estimator."""

    def __init__(self, message: str, required: int):
        super().__init__(f"{message} (need at least {required} samples)")
        self.required = required


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, error_estimate: Optional[float] = None):
        detail = f"{message} (achieved error estimate {error_estimate:.3e})" if error_estimate is not None else message
        super().__init__(detail)
        self.error_estimate = error_estimate


class NumericalError(RuntimeError):
    """Linear algebra reached a state that correct inputs cannot produce."""
