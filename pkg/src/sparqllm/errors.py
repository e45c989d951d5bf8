"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SparqllmError(Exception):
    """Base class for all errors raised by this package."""


class InputError(SparqllmError):
    """Caller passed a value that violates an operation's preconditions."""


class StateError(SparqllmError):
    """Operation invoked before the component was initialized (e.g. no index built)."""


class TransportError(SparqllmError):
    """A remote dependency could not be reached."""

    def __init__(self, message: str, retries: int = 0):
        super().__init__(message)
        self.retries = retries


class UndefinedMetricError(SparqllmError):
    """Metric has no defined value for the given inputs (e.g. empty denominator)."""
