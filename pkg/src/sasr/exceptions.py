"""
Exception classes for the SASR package.
"""

from typing import Any


class SasrError(Exception):
    """Base exception for all SASR errors."""

    def __init__(
        self,
        message: str,
        reason: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        """
        Initialize SASR error.
        """
        self.message = message
        self.reason = reason
        self.details = details
        super().__init__(message)

    def __str__(self) -> str:
        """String representation of the error."""
        parts = [self.message]
        if self.reason:
            parts.append(f"[Reason: {self.reason}]")
        return " ".join(parts)

    def __repr__(self) -> str:
        """Developer-friendly representation."""
        return f"{self.__class__.__name__}(message={self.message!r}, reason={self.reason!r})"


class ValidationError(SasrError):
    """Raised when an argument value is invalid (non-finite, out of range, nonpositive)."""

    pass


class DimensionError(ValidationError):
    """Raised when array shapes do not match what an operation expects."""

    pass


class ConfigurationError(SasrError):
    """Raised when run configuration is invalid or names an unknown key."""

    def __init__(
        self,
        message: str,
        reason: str | None = None,
        details: dict[str, Any] | None = None,
        key: str | None = None,
    ) -> None:
        self.key = key
        super().__init__(message, reason=reason, details=details)


class TrainingError(SasrError):
    """Raised when training cannot continue (non-finite outputs, empty replay, missing cache)."""

    pass


class ArtifactError(SasrError):
    """Raised when a checkpoint, snapshot, parameter file or run log is missing or malformed."""

    pass
