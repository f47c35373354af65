"""Orthogonalizing EM (OEM) solvers for penalized least squares."""
from . import _backend
from .exceptions import ConvergenceError, DataError, DomainError, OEMError
from .linalg import EigenResult, gram, pinv_least_squares, power_method, sym_eigen
from .orthogonalize import OrthoExpansion, ScalingChoice, expand, gamma1_fast
from .penalties import PenaltyKind, PenaltySpec, penalty_value, solve_scalar
from .solver import FitResult, SolverOptions, fit, fit_hybrid, objective, oem_step

__version__ = "0.1.0"
BACKEND = _backend.NAME

__all__ = [
    "ConvergenceError", "DataError", "DomainError", "OEMError",
    "EigenResult", "gram", "pinv_least_squares", "power_method", "sym_eigen",
    "OrthoExpansion", "ScalingChoice", "expand", "gamma1_fast",
    "PenaltyKind", "PenaltySpec", "penalty_value", "solve_scalar",
    "FitResult", "SolverOptions", "fit", "fit_hybrid", "objective", "oem_step",
]
