"""Exception types shared across the package.

Violations found by validators are data, not exceptions; these classes cover
faults that make a computation impossible or an input unreadable.
"""

from __future__ import annotations


class UnlescoreError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgument(UnlescoreError):
    """An argument violates a documented precondition."""


class DegenerateSample(UnlescoreError):
    """Too little or zero-variance data to fit or correlate."""


class ParseError(UnlescoreError):
    """A file could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
