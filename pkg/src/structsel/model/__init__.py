from .contrasts import DOAC_TYPE_CONTRASTS, estimate_contrasts
from .design import Design
from .logl import (
    FitConfig,
    FitResult,
    LatentCoeffs,
    adaptive_weights,
    fit_lasso,
    fit_logl,
    fit_path,
    lambda_grid,
    lambda_max,
)
from .penalties import DEFAULT_GAMMA, PenaltySpec, group_prox, penalty_value, radial_prox

__all__ = [
    "DEFAULT_GAMMA",
    "DOAC_TYPE_CONTRASTS",
    "Design",
    "FitConfig",
    "FitResult",
    "LatentCoeffs",
    "PenaltySpec",
    "adaptive_weights",
    "estimate_contrasts",
    "fit_lasso",
    "fit_logl",
    "fit_path",
    "group_prox",
    "lambda_grid",
    "lambda_max",
    "penalty_value",
    "radial_prox",
]
