"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PPPCovError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(PPPCovError, ValueError):
    """An argument is outside the range an operation accepts."""


class DomainError(PPPCovError, ValueError):
    """A mathematical function was asked for a value outside its domain."""


class ConvergenceError(PPPCovError, ArithmeticError):
    """A numerical routine exhausted its budget before reaching tolerance.

    The best available estimate and its error bound travel with the exception
    so that callers may decide whether they can live with it.
    """

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


class InconsistencyError(PPPCovError, ArithmeticError):
    """A result violated an internal numerical sanity bound."""
