"""Cross-validation over a lambda path and synthetic data on the study schema."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFold, InfeasibleSpec, UnknownVariable
from .fixtures import study_registry, study_rules
from .grouping import GroupingStructure
from .model.design import Design
from .model.logl import FitConfig, fit_path, lambda_grid, lambda_max
from .rules import RuleSet, satisfies
from .varsets import VarRegistry, VarSet

RISKS = ("deviance", "misclassification", "squared_error")


@dataclass
class CVConfig:
    folds: int = 10
    risk: str = "deviance"
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("need at least two folds")
        if self.risk not in RISKS:
            raise ValueError(f"risk must be one of {RISKS}")


@dataclass
class PathConfig:
    kind: str = "L2"
    gamma: float | None = None
    n_lambda: int = 20
    lambda_min_ratio: float = 0.01
    fit: FitConfig = field(default_factory=FitConfig)


@dataclass(eq=False)
class CVResult:
    lambdas: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    fold_risks: np.ndarray  # folds x lambdas
    folds: np.ndarray  # fold label per row
    selected_index: int

    @property
    def selected_lambda(self) -> float:
        return float(self.lambdas[self.selected_index])


def assign_folds(y, k: int, seed: int, stratified: bool = True) -> np.ndarray:
    """Seeded fold labels in ``0..k-1`` whose counts differ by at most one.

    Stratification deals each outcome class out in turn, continuing the
    round-robin across classes so the overall balance is kept.
    """
    y = np.asarray(y)
    n = y.size
    if not 2 <= k <= n:
        raise ValueError(f"folds must lie in [2, n={n}], got {k}")
    rng = np.random.default_rng(seed)
    if stratified:
        order = np.concatenate([rng.permutation(np.flatnonzero(y == c)) for c in np.unique(y)])
    else:
        order = rng.permutation(n)
    labels = np.empty(n, dtype=int)
    labels[order] = np.arange(n) % k
    return labels


def pointwise_risk(y, eta, risk: str, binary: bool) -> np.ndarray:
    """Per-row risk of linear predictors ``eta`` (rows x lambdas)."""
    y = np.asarray(y, dtype=float)[:, None]
    if not binary:
        if risk == "misclassification":
            raise ValueError("misclassification needs a binary outcome")
        return (y - eta) ** 2
    if risk == "deviance":
        return 2.0 * (np.logaddexp(0.0, eta) - y * eta)
    if risk == "misclassification":
        return ((eta > 0) != (y > 0.5)).astype(float)
    mu = 1.0 / (1.0 + np.exp(-eta))
    return (y - mu) ** 2


def _fold_risk(design, groups, lambdas, labels, k, path, risk):
    test = labels == k
    train = design.subset(np.flatnonzero(~test))
    if train.outcome_kind == "binary" and np.unique(train.y).size < 2:
        raise DegenerateFold(f"training part of fold {k} holds a single outcome class")
    fits = fit_path(train, groups, path.kind, path.gamma, lambdas=lambdas, config=path.fit)
    B = np.column_stack([f.beta for f in fits])
    b0 = np.array([f.intercept for f in fits])
    eta = design.X[test] @ B + b0
    return pointwise_risk(design.y[test], eta, risk, design.outcome_kind == "binary")


def cross_validate(
    design: Design,
    groups: GroupingStructure,
    path: PathConfig | None = None,
    cv: CVConfig | None = None,
    lambdas=None,
    threads: int = 1,
) -> CVResult:
    """K-fold risk along a lambda grid fixed on the full data.

    The pooled mean weights every row equally; ``sd`` is the spread of the
    per-fold means. The selected lambda minimizes the mean, ties going to the
    larger lambda.
    """
    path = path or PathConfig()
    cv = cv or CVConfig()
    if lambdas is None:
        lambdas = lambda_grid(lambda_max(design, groups), path.n_lambda, path.lambda_min_ratio)
    lambdas = np.asarray(lambdas, dtype=float)
    strat = cv.stratified and design.outcome_kind == "binary"
    labels = assign_folds(design.y, cv.folds, cv.seed, strat)

    def task(k):
        return _fold_risk(design, groups, lambdas, labels, k, path, cv.risk)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_fold = list(pool.map(task, range(cv.folds)))
    else:
        per_fold = [task(k) for k in range(cv.folds)]
    # fixed summation order keeps results independent of scheduling
    rows = np.zeros((design.n, lambdas.size))
    for k, r in enumerate(per_fold):
        rows[labels == k] = r
    mean = rows.sum(axis=0) / design.n
    fold_risks = np.array([r.mean(axis=0) for r in per_fold])
    sd = fold_risks.std(axis=0, ddof=1)
    best = np.flatnonzero(mean == mean.min())
    sel = int(best[np.argmax(lambdas[best])])
    return CVResult(lambdas, mean, sd, fold_risks, labels, sel)


# Prevalences by anticoagulant category (high-dose DOAC, low-dose DOAC, warfarin).
CATEGORY_PROBS = (0.32, 0.24, 0.43)
DOAC_DRUG_PROBS = {  # (Apixaban, Dabigatran); Rivaroxaban takes the rest
    "high": (0.54, 0.11),
    "low": (0.50, 0.28),
}
CATEGORY_PREVALENCE = {
    "Sex": (0.50, 0.66, 0.59),
    "CHA2DS2VASc": (0.79, 0.95, 0.91),
    "Stroke": (0.25, 0.27, 0.30),
    "Anemia": (0.06, 0.09, 0.13),
    "Malignancy": (0.27, 0.26, 0.26),
    "LiverDisease": (0.02, 0.02, 0.02),
    "HistoryMajorBleeding": (0.28, 0.36, 0.37),
    "RenalDisease": (0.18, 0.27, 0.35),
    "HeartDisease": (0.55, 0.65, 0.69),
    "Diabetes": (0.36, 0.30, 0.40),
    "COPD": (0.38, 0.37, 0.41),
    "Dyslipidemia": (0.59, 0.55, 0.59),
    "HighAdherence": (0.85, 0.86, 0.88),
    "Antiplatelets": (0.27, 0.32, 0.37),
    "NSAIDs": (0.01, 0.01, 0.01),
    "Antidepressants": (0.18, 0.20, 0.18),
    "PPIs": (0.37, 0.44, 0.49),
}
AGE_MEAN, AGE_SD = 80.0, 8.7
DRUG_VARS = ("DOAC", "Apixaban", "Dabigatran", "HighDoseDOAC")


@dataclass
class SyntheticSpec:
    """Synthetic cohort on the study schema (or any registry).

    ``true_beta`` maps variable names to coefficients on the original scale.
    ``target`` is the rule set or grouping the true support must respect;
    when omitted on the study schema it is the study rules with the forced
    rule relaxed to none-or-all.
    """

    n: int = 1000
    true_beta: dict = field(default_factory=dict)
    intercept: float = 0.0
    outcome_kind: str = "binary"
    seed: int = 0
    registry: VarRegistry | None = None
    target: RuleSet | GroupingStructure | None = None
    noise_sd: float = 1.0
    default_prevalence: float = 0.3


def _resolve(spec: SyntheticSpec):
    reg = spec.registry or study_registry()
    target = spec.target
    if target is None and spec.registry is None:
        target = study_rules(reg).none_or_all()
    return reg, target


def true_support(spec: SyntheticSpec, registry: VarRegistry) -> VarSet:
    for name in spec.true_beta:
        if name not in registry:
            raise UnknownVariable(name)
    return registry.varset(n for n, b in spec.true_beta.items() if b != 0)


def in_target(support: VarSet, target) -> bool:
    if target is None:
        return True
    if isinstance(target, GroupingStructure):
        inside = 0
        for g in target.groups:
            if g <= support:
                inside |= g.mask
        return inside == support.mask
    rule = target.as_rule()
    return rule is None or satisfies(support, rule)


def generate_synthetic(spec: SyntheticSpec) -> Design:
    """Draw covariates with the drug nesting logic, then the outcome.

    The anticoagulant category is drawn first and the drug indicators are
    derived from it; other binary covariates use category-specific
    prevalences; interaction columns (``a:b``) are products of their parts.
    """
    reg, target = _resolve(spec)
    support = true_support(spec, reg)
    if not in_target(support, target):
        raise InfeasibleSpec(f"true support {support!r} is outside the target dictionary")
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    probs = np.asarray(CATEGORY_PROBS) / sum(CATEGORY_PROBS)
    cat = rng.choice(3, size=n, p=probs)
    cols = {"DOAC": (cat < 2).astype(float), "HighDoseDOAC": (cat == 0).astype(float)}
    u = rng.random(n)
    apx, dab = np.zeros(n), np.zeros(n)
    for c, key in ((0, "high"), (1, "low")):
        pa, pd = DOAC_DRUG_PROBS[key]
        m = cat == c
        apx[m] = u[m] < pa
        dab[m] = (u[m] >= pa) & (u[m] < pa + pd)
    cols["Apixaban"], cols["Dabigatran"] = apx, dab
    cols["Age"] = rng.normal(AGE_MEAN, AGE_SD, size=n)
    for name, prev in CATEGORY_PREVALENCE.items():
        cols[name] = (rng.random(n) < np.asarray(prev)[cat]).astype(float)
    X = np.empty((n, len(reg)))
    for j, name in enumerate(reg.names):
        if ":" in name:
            continue
        if name not in cols:
            cols[name] = (rng.random(n) < spec.default_prevalence).astype(float)
        X[:, j] = cols[name]
    for j, name in enumerate(reg.names):
        if ":" in name:
            parts = name.split(":")
            missing = [p for p in parts if p not in cols]
            if missing:
                raise UnknownVariable(f"interaction {name!r} refers to {missing}")
            X[:, j] = np.prod([cols[p] for p in parts], axis=0)
    beta = np.zeros(len(reg))
    for name, b in spec.true_beta.items():
        beta[reg.index(name)] = b
    eta = spec.intercept + X @ beta
    if spec.outcome_kind == "binary":
        y = (rng.random(n) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    else:
        y = eta + rng.normal(0.0, spec.noise_sd, size=n)
    return Design(reg, X, y, spec.outcome_kind)


def nesting_violations(design: Design) -> int:
    """Rows breaking the drug coding or the interaction products."""
    reg = design.registry
    X = design.X
    col = {n: X[:, reg.index(n)] for n in reg.names}
    bad = np.zeros(design.n, dtype=bool)
    if all(v in col for v in DRUG_VARS):
        doac = col["DOAC"]
        for v in ("Apixaban", "Dabigatran", "HighDoseDOAC"):
            bad |= (col[v] == 1) & (doac != 1)
        bad |= (col["Apixaban"] == 1) & (col["Dabigatran"] == 1)
    for name in reg.names:
        if ":" in name and all(p in col for p in name.split(":")):
            prod = np.prod([col[p] for p in name.split(":")], axis=0)
            bad |= col[name] != prod
    return int(bad.sum())
