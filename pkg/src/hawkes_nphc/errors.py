"""
Exception hierarchy shared by the library and the CLI.

Every error carries the exit code the CLI uses for it (2 validation,
3 numeric failure, 4 I/O) and can render itself as a JSON-ready record.
"""

from typing import Any, Dict


class NPHCError(Exception):
    """Base class for every error raised by hawkes_nphc."""

    exit_code = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_record(self) -> Dict[str, Any]:
        """Machine-readable form printed on stderr by the CLI."""
        record: Dict[str, Any] = {"error": type(self).__name__, "message": self.message}
        record.update(self.details)
        return record


# Validation errors

class ValidationError(NPHCError):
    exit_code = 2


class ConfigError(ValidationError):
    pass


class InvalidKernel(ValidationError):
    pass


class InvalidWindow(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class DimensionTooSmall(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class StabilityViolation(ValidationError):
    """Spectral radius of G is not safely below 1."""


class UnstableModel(StabilityViolation):
    pass


# Numeric failures

class NumericError(NPHCError):
    exit_code = 3


class SingularMatrix(NumericError):
    pass


class NonConvergence(NumericError):
    pass


class DegenerateCumulants(NumericError):
    pass


class NonFiniteLoss(NumericError):
    def __init__(self, message: str, iteration: int, **details: Any):
        super().__init__(message, iteration=iteration, **details)
        self.iteration = iteration


# I/O

class DataIOError(NPHCError):
    exit_code = 4


class ParseError(DataIOError):
    def __init__(self, message: str, line: int, **details: Any):
        super().__init__(message, line=line, **details)
        self.line = line


class EmptyDataWarning(UserWarning):
    """All event sequences are empty; estimators fall back to zeros."""
