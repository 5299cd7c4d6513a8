"""Exception types raised by the package."""

from __future__ import annotations


class DimensionError(ValueError):
    """A state, velocity or costate vector has the wrong length."""


class DomainError(ValueError):
    """A query falls outside the set where the object is defined."""


class ConfigError(ValueError):
    """A problem configuration file is malformed."""


class AccuracyError(RuntimeError):
    """Requested tolerance was not reached; ``best`` holds the estimate."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class ResolutionError(RuntimeError):
    """The grid solver cannot resolve a cell at the requested resolution."""
