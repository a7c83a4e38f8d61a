"""Exception types shared across the package."""

from __future__ import annotations


class LtcsimError(Exception):
    """Base class for all package errors."""


class SolverError(LtcsimError):
    """A root finder or continuation pass failed to converge."""


class NumericsError(LtcsimError):
    """A numerical invariant was violated (unitarity drift, unphysical branch, ...)."""


class LabelingError(LtcsimError):
    """A required dressed level could not be labeled unambiguously."""


class ConfigError(LtcsimError):
    """A scenario configuration failed strict parsing or validation."""
