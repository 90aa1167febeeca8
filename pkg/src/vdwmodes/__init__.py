"""Non-retarded van der Waals interactions of finite bodies.

Modules: ``dielectrics`` (material models), ``multipole`` (spheres above a
substrate), ``pfa`` (planar baselines), ``mesh`` and ``bem`` (arbitrary
bodies), ``cli`` (batch driver).
"""

from __future__ import annotations

__version__ = "0.1.0"

from .dielectrics import VACUUM, DielectricModel, gold, polystyrene
from .errors import (AccuracyError, ConfigError, ConvergenceWarning, DomainError,
                     GeometryError, NumericalError, ProximityWarning, VdwError)

__all__ = [
    "__version__",
    "VACUUM",
    "DielectricModel",
    "gold",
    "polystyrene",
    "VdwError",
    "DomainError",
    "GeometryError",
    "NumericalError",
    "AccuracyError",
    "ConfigError",
    "ConvergenceWarning",
    "ProximityWarning",
]
