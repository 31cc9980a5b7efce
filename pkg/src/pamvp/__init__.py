"""Planar p-harmonic functions with a prescribed critical point, built from
hodographic power series, and numerical checks of their mean value behaviour."""

from .errors import (
    CalibrationError,
    ConfigError,
    ConvergenceError,
    DomainError,
    FitError,
    InversionError,
    OutsideRegionError,
)
from .hodograph import CoefficientSet, HodographModel, PolarPoint, invert_A, invert_H
from .pharmonic import eval_U, eval_u, grad_u, plaplacian_residual, singular_gap
from .spectral import ProblemParams, amvp_weights, exponent_ratio, spectral_triple

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "CoefficientSet",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "FitError",
    "HodographModel",
    "InversionError",
    "OutsideRegionError",
    "PolarPoint",
    "ProblemParams",
    "amvp_weights",
    "eval_U",
    "eval_u",
    "exponent_ratio",
    "grad_u",
    "invert_A",
    "invert_H",
    "plaplacian_residual",
    "singular_gap",
    "spectral_triple",
]
