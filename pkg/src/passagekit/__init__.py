"""Saddle-point local estimates for subordinator densities and first-passage times."""
from .errors import (
    ConvergenceFailure,
    DomainError,
    HypothesisHFailed,
    OutOfRegime,
    ParseError,
    PassageKitError,
    StepCapExceeded,
    Unsupported,
)
from .levy_model import CompoundPoissonExp, Gamma, Stable, psi_suite, stable_half
from .passage import creep_conditional, hC_density, hC_interval, hJ_density, hJ_interval, stable_limit
from .saddle import classify_regime, density_estimate, solve_rho

__version__ = "0.1.0"

__all__ = [
    "CompoundPoissonExp",
    "ConvergenceFailure",
    "DomainError",
    "Gamma",
    "HypothesisHFailed",
    "OutOfRegime",
    "ParseError",
    "PassageKitError",
    "Stable",
    "StepCapExceeded",
    "Unsupported",
    "classify_regime",
    "creep_conditional",
    "density_estimate",
    "hC_density",
    "hC_interval",
    "hJ_density",
    "hJ_interval",
    "psi_suite",
    "solve_rho",
    "stable_half",
    "stable_limit",
]
