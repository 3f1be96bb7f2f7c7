"""Exception types shared across the package."""
from __future__ import annotations


class BetaFError(Exception):
    """Base class for all package-specific errors."""


class DomainError(BetaFError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NumericError(BetaFError, RuntimeError):
    """An iterative numerical routine failed to converge or overflowed.

    ``last_iterate`` holds the final iterate when one is available.
    """

    def __init__(self, message: str, last_iterate: float | None = None):
        super().__init__(message)
        self.last_iterate = last_iterate


class ParseError(BetaFError, ValueError):
    """A data file contains a malformed row or value."""


class SchemaError(BetaFError, ValueError):
    """A data file violates the grouped-data schema (structure, ordering)."""


class MetricError(BetaFError, ValueError):
    """Goodness-of-fit metrics cannot be computed for the given inputs."""


class FitError(BetaFError, RuntimeError):
    """The optimizer could not produce any usable result."""
