"""Exception hierarchy. Each error class carries the CLI exit code for its failure class."""

from __future__ import annotations


class RawlsianError(Exception):
    """Base class for all library errors."""

    exit_code: int = 1


class InvalidInput(RawlsianError, ValueError):
    """Malformed or inconsistent input values."""

    exit_code = 2


class ParseError(InvalidInput):
    """A file could not be parsed. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnknownPreset(InvalidInput):
    """Requested synthetic preset does not exist."""


class OutputError(RawlsianError):
    """Reading an input file or writing a result file failed."""

    exit_code = 3


class InsufficientData(RawlsianError):
    """A sub-population has too few rows for the requested estimate."""

    exit_code = 4


class DomainTooLarge(RawlsianError):
    """The exact oracle was asked to enumerate more than it is allowed to."""

    exit_code = 4


class DegeneratePointMass(RawlsianError):
    """A zero-variance projection sits exactly on the threshold."""

    exit_code = 4


class NonSeparable(RawlsianError):
    """No classifier in the hypothesis class beats the trivial worst case on ``group``."""

    exit_code = 5

    def __init__(self, message: str, group: int | None = None) -> None:
        super().__init__(message)
        self.group = group


class SolverBudgetExceeded(RawlsianError):
    """An iterative solver ran out of iterations before meeting its tolerance."""

    exit_code = 5


class OracleInconsistency(RawlsianError, AssertionError):
    """Two computations that must agree did not."""

    exit_code = 1
