"""Exceptions raised by pathgrad."""

from __future__ import annotations


class PathgradError(Exception):
    """Base exception for pathgrad errors."""

    def __init__(self, message: str, cause: Exception | None = None):
        self.message = message
        self.cause = cause
        super().__init__(message)


class DomainError(PathgradError, ValueError):
    """Raised when an input lies outside an operation's domain."""


class SimplexError(DomainError):
    """Raised when a Dirichlet point is off the simplex or degenerate."""


class AsymmetryError(DomainError):
    """Raised when a rotation generator is not antisymmetric."""


class SingularCholeskyError(DomainError):
    """Raised when a Cholesky factor is singular or badly conditioned."""


class SingularDensityError(PathgradError):
    """Raised when the master formula would divide by a vanishing density."""


class ConvergenceError(PathgradError):
    """Raised when an iterative evaluation hits its iteration cap."""


class RichardsonError(ConvergenceError):
    """Raised when a Richardson extrapolation sequence fails to contract."""


class FitFailureError(PathgradError):
    """Raised when a fitted rational surface fails validation."""


class CoefficientFileError(PathgradError):
    """Raised when a coefficient file cannot be read or does not match."""


class UnsupportedDistributionError(PathgradError):
    """Raised when a distribution lacks a capability an estimator needs."""
