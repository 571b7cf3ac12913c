"""
Toolkit Exceptions
"""

from typing import Any, Optional


class OscillationToolkitError(Exception):
    """Base class for every error raised by the toolkit."""

    def __init__(self, detail: Optional[str] = None, **context: Any):
        super().__init__(detail or "An error occurred")
        self.detail = detail or "An error occurred"
        self.context = context


class PreconditionError(OscillationToolkitError):
    """An operation was called outside its documented domain."""


class DomainError(OscillationToolkitError):
    """A function was evaluated outside the set it is defined on."""


class QuadratureError(OscillationToolkitError):
    """An integral did not reach its tolerance within the subdivision limit."""

    def __init__(self, detail: str, value: float, error_estimate: float, **context: Any):
        super().__init__(detail, value=value, error_estimate=error_estimate, **context)
        self.value = value
        self.error_estimate = error_estimate


class ConfigurationError(OscillationToolkitError):
    """A configuration file, flag set or experiment config is malformed."""


class StorageError(OscillationToolkitError):
    """A report could not be written."""


class VerificationFailure(OscillationToolkitError):
    """An identity or property check exceeded its tolerance."""

    def __init__(self, detail: str, failures: Optional[list[dict[str, Any]]] = None):
        super().__init__(detail, failures=failures or [])
        self.failures = failures or []
