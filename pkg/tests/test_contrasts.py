import math

import numpy as np
import pytest

from structsel.errors import UnknownVariable
from structsel.fixtures import study_registry
from structsel.grouping import GroupingStructure
from structsel.model import Design, FitResult, LatentCoeffs, PenaltySpec
from structsel.model.contrasts import DOAC_TYPE_CONTRASTS, estimate_contrasts
from structsel.varsets import VarSet


def fake_fit(beta, outcome_kind="binary"):
    reg = study_registry()
    beta = np.asarray(beta, dtype=float)
    g = GroupingStructure.singletons(reg)
    latent = LatentCoeffs(g.groups, tuple(beta[[i]] for i in range(len(reg))), len(reg))
    nz = np.flatnonzero(beta)
    support = VarSet(reg, sum(1 << int(i) for i in nz))
    return FitResult(beta, 0.0, beta, 0.0, latent, tuple(nz), support, 0.1,
                     PenaltySpec("L2", 0.1), 0.0, 1, True, outcome_kind)


def test_zero_fit_gives_unit_odds_ratios():
    fit = fake_fit(np.zeros(28))
    out = estimate_contrasts(fit)
    assert [name for name, _ in out] == [name for name, _ in DOAC_TYPE_CONTRASTS]
    assert all(v == 1.0 for _, v in out)


def test_single_variable_round_trip():
    reg = study_registry()
    beta = np.zeros(28)
    beta[reg.index("DOAC")] = math.log(1.39)
    out = estimate_contrasts(fake_fit(beta), [("DOAC", {"DOAC": 1})])
    assert out == [("DOAC", pytest.approx(1.39, abs=1e-12))]


def test_preset_sums():
    reg = study_registry()
    rng = np.random.default_rng(0)
    beta = rng.normal(scale=0.3, size=28)
    got = dict(estimate_contrasts(fake_fit(beta)))
    b = {n: beta[reg.index(n)] for n in ("DOAC", "HighDoseDOAC", "Apixaban", "Dabigatran")}
    assert len(DOAC_TYPE_CONTRASTS) == 7
    assert got["High-dose-Apixaban"] == pytest.approx(
        math.exp(b["DOAC"] + b["HighDoseDOAC"] + b["Apixaban"]), rel=1e-12)
    assert got["Low-dose-Dabigatran"] == pytest.approx(math.exp(b["DOAC"] + b["Dabigatran"]), rel=1e-12)
    assert got["Low-dose-Rivaroxaban"] == pytest.approx(math.exp(b["DOAC"]), rel=1e-12)
    assert got["Warfarin"] == 1.0


def test_signed_contrast():
    reg = study_registry()
    beta = np.zeros(28)
    beta[reg.index("Apixaban")] = 0.4
    beta[reg.index("Dabigatran")] = 0.1
    out = estimate_contrasts(fake_fit(beta), [("A vs D", {"Apixaban": 1, "Dabigatran": -1})])
    assert out[0][1] == pytest.approx(math.exp(0.3), rel=1e-12)


def test_errors():
    with pytest.raises(UnknownVariable):
        estimate_contrasts(fake_fit(np.zeros(28)), [("bad", {"Rivaroxaban": 1})])
    with pytest.raises(ValueError):
        estimate_contrasts(fake_fit(np.zeros(28), "continuous"))


def test_contrasts_on_real_fit():
    from structsel.harness import SyntheticSpec, generate_synthetic
    from structsel.fixtures import study_groups
    from structsel.model import fit_logl

    d = generate_synthetic(SyntheticSpec(n=600, true_beta={"DOAC": 0.5, "HighDoseDOAC": 0.4},
                                         intercept=-1.0, seed=2))
    assert isinstance(d, Design)
    fit = fit_logl(d, study_groups(d.registry), PenaltySpec("L2", 0.005))
    reg = d.registry
    got = dict(estimate_contrasts(fit))
    want = math.exp(fit.beta[reg.index("DOAC")] + fit.beta[reg.index("HighDoseDOAC")])
    assert got["High-dose-Rivaroxaban"] == pytest.approx(want, rel=1e-12)
