from __future__ import annotations

import math
from typing import Mapping, Sequence

from ..errors import UnknownVariable

# Odds ratios of each anticoagulant type against warfarin: the linear
# predictor difference is the sum of the indicator coefficients switched on.
DOAC_TYPE_CONTRASTS = (
    ("High-dose-Apixaban", {"DOAC": 1, "HighDoseDOAC": 1, "Apixaban": 1}),
    ("High-dose-Dabigatran", {"DOAC": 1, "HighDoseDOAC": 1, "Dabigatran": 1}),
    ("High-dose-Rivaroxaban", {"DOAC": 1, "HighDoseDOAC": 1}),
    ("Low-dose-Apixaban", {"DOAC": 1, "Apixaban": 1}),
    ("Low-dose-Dabigatran", {"DOAC": 1, "Dabigatran": 1}),
    ("Low-dose-Rivaroxaban", {"DOAC": 1}),
    ("Warfarin", {}),
)


def estimate_contrasts(fit, contrasts: Sequence[tuple[str, Mapping[str, float]]] = DOAC_TYPE_CONTRASTS):
    """``exp`` of signed coefficient sums (original scale) for a logistic fit."""
    if fit.outcome_kind != "binary":
        raise ValueError("odds-ratio contrasts need a binary-outcome fit")
    reg = fit.support.registry
    out = []
    for name, combo in contrasts:
        total = 0.0
        for var, sign in combo.items():
            if var not in reg:
                raise UnknownVariable(f"contrast {name!r} uses unknown variable {var!r}")
            total += sign * float(fit.beta[reg.index(var)])
        out.append((name, math.exp(total)))
    return out
