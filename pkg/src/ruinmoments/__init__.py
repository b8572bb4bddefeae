"""Moments of the ruin time in the perturbed Cramer-Lundberg model with
phase-type claims."""

from .errors import DomainError
from .model import Regime, RegimeTag, RiskModel, classify, psi, psi_deriv, psi_derivative
from .moments import (
    MomentMethod,
    MomentReport,
    asymptotic_slope,
    eta_derivs,
    laplace_uk,
    moments_convolution,
    moments_exponential,
    moments_general,
    moments_phase_type,
    ruin_probability,
)
from .montecarlo import McConfig, McEstimate, estimate
from .phasetype import PhaseTypeDistribution
from .roots import RootSystem, phi_of_q, solve_roots
from .scale import scale_w, scale_w_dq, scale_w_int, scale_z

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "McConfig",
    "McEstimate",
    "MomentMethod",
    "MomentReport",
    "PhaseTypeDistribution",
    "Regime",
    "RegimeTag",
    "RiskModel",
    "RootSystem",
    "asymptotic_slope",
    "classify",
    "estimate",
    "eta_derivs",
    "laplace_uk",
    "moments_convolution",
    "moments_exponential",
    "moments_general",
    "moments_phase_type",
    "phi_of_q",
    "psi",
    "psi_deriv",
    "psi_derivative",
    "ruin_probability",
    "scale_w",
    "scale_w_dq",
    "scale_w_int",
    "scale_z",
    "solve_roots",
]
