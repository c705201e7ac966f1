"""Hitting times of points for symmetric Levy processes.

Tails and time derivatives of ``P(tau_x > t)`` via the spectral
representation, with explicit two-sided bounds and independent cross-checks.
"""

__version__ = "0.1.0"

from .config import DEFAULT, Tolerances
from .models import ExponentModel, ModelError, brownian, load_model, make_model, model_from_spec, scaling_check
from .transforms import KernelEvaluator, kernel
from .phase import PhaseBracketError, PhaseResult, theta, theta_grid
from .eigenfunction import EigenfunctionSample, f, g, g_hat, potential_v
from .hitting import (
    BoundCertificate,
    BoundConstants,
    TailResult,
    asymp_large_t,
    asymp_small_x,
    bound_corollary,
    bound_theorem,
    constants,
    tail,
    tail_grid,
    tilde_constants,
)
from .oracle import OracleReport, brownian_tail, laplace_consistency, laplace_mgf
from .numerics import IntegrationError, NumericalError

__all__ = [
    "DEFAULT", "Tolerances", "ExponentModel", "ModelError", "brownian", "load_model",
    "make_model", "model_from_spec", "scaling_check", "KernelEvaluator", "kernel",
    "PhaseBracketError", "PhaseResult", "theta", "theta_grid", "EigenfunctionSample",
    "f", "g", "g_hat", "potential_v", "BoundCertificate", "BoundConstants", "TailResult",
    "asymp_large_t", "asymp_small_x", "bound_corollary", "bound_theorem", "constants",
    "tail", "tail_grid", "tilde_constants", "OracleReport", "brownian_tail",
    "laplace_consistency", "laplace_mgf", "IntegrationError", "NumericalError",
]
