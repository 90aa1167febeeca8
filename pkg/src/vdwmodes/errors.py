"""Exception and warning classes shared across the package."""

from __future__ import annotations


class VdwError(Exception):
    """Base class for all package errors."""


class DomainError(VdwError, ValueError):
    """An argument lies outside the domain of the operation."""


class DivergenceError(DomainError):
    """The requested quantity is infinite (e.g. undamped Drude at xi = 0)."""


class NoContrastError(DomainError):
    """Body and ambient have identical permittivity; there is no interaction."""


class ResonanceError(DomainError):
    """Evaluation exactly on a pole of a response function."""


class GeometryError(VdwError, ValueError):
    """Invalid or degenerate geometry (coincident panels, crossing a plane...)."""


class NumericalError(VdwError, ArithmeticError):
    """A linear-algebra step failed or produced a non-finite value."""


class AccuracyError(NumericalError):
    """A convergence loop stopped before reaching its tolerance.

    ``achieved`` holds the best error estimate that was reached.
    """

    def __init__(self, message: str, achieved: float = float("nan")):
        super().__init__(message)
        self.achieved = achieved


class ConfigError(VdwError, ValueError):
    """Malformed or inconsistent CLI configuration."""


class ConvergenceWarning(UserWarning):
    """Non-fatal: a truncation cap was hit before the requested tolerance."""


class ProximityWarning(UserWarning):
    """Separation is below the range where the discretization was validated."""
