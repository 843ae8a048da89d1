"""Latent overlapping group lasso fitted by accelerated proximal gradient.

Each variable is duplicated once per group containing it, which turns the
overlapping penalty into an ordinary non-overlapping group penalty on the
latent coefficients. The aggregate coefficient of a variable is the sum of
its latent copies, and the selected variables are the union of the groups
whose latent block is nonzero.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, NotConverged
from ..grouping import GroupingStructure
from ..varsets import VarSet
from .design import Design
from .penalties import PenaltySpec, penalty_value, radial_prox

log = logging.getLogger(__name__)

# relative margin so that the first path point is exactly all-zero
_LAMBDA_MAX_MARGIN = 1e-9


@dataclass
class FitConfig:
    tol: float = 1e-8
    max_iter: int = 10_000


@dataclass(frozen=True, eq=False)
class LatentCoeffs:
    groups: tuple
    blocks: tuple  # one array per group, over the group's members
    p: int

    def dense(self, i: int) -> np.ndarray:
        """Latent vector of group ``i`` as a length-p vector (zero off-group)."""
        out = np.zeros(self.p)
        out[self.groups[i].indices()] = self.blocks[i]
        return out

    def beta(self) -> np.ndarray:
        out = np.zeros(self.p)
        for g, b in zip(self.groups, self.blocks):
            np.add.at(out, g.indices(), b)
        return out


@dataclass(eq=False)
class FitResult:
    beta: np.ndarray
    intercept: float
    beta_std: np.ndarray
    intercept_std: float
    latent: LatentCoeffs
    selected_groups: tuple
    support: VarSet
    lam: float
    penalty: PenaltySpec
    objective: float
    iterations: int
    converged: bool
    outcome_kind: str = "binary"
    history: list = field(default_factory=list, repr=False)

    def coef(self) -> dict:
        return dict(zip(self.support.registry.names, self.beta.tolist()))


class _Problem:
    """Smooth loss and group penalty on the latent-expanded design."""

    def __init__(self, design: Design, groups: GroupingStructure):
        if groups.registry != design.registry:
            raise DimensionMismatch("grouping and design use different registries")
        if groups.universe.mask != design.registry.full_mask:
            raise DimensionMismatch("grouping does not cover every design column")
        self.design = design
        self.groups = groups
        self.cols = np.concatenate([np.array(g.indices(), dtype=int) for g in groups.groups])
        sizes = np.array([len(g) for g in groups.groups])
        self.starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        self.owner = np.repeat(np.arange(len(groups)), sizes)
        self.w = np.asarray(groups.weights, dtype=float)
        self.Z = design.Xs[:, self.cols]
        self.y = design.y
        self.n = design.n
        self.binary = design.outcome_kind == "binary"

    def null_intercept(self) -> float:
        ybar = self.y.mean()
        if not self.binary:
            return float(ybar)
        ybar = min(max(ybar, 1e-12), 1 - 1e-12)
        return float(np.log(ybar / (1 - ybar)))

    def loss(self, b0, a):
        eta = b0 + self.Z @ a
        if self.binary:
            return float(np.mean(np.logaddexp(0.0, eta) - self.y * eta))
        r = self.y - eta
        return float(0.5 * np.mean(r * r))

    def loss_grad(self, b0, a):
        eta = b0 + self.Z @ a
        if self.binary:
            f = float(np.mean(np.logaddexp(0.0, eta) - self.y * eta))
            d = (_sigmoid(eta) - self.y) / self.n
        else:
            r = eta - self.y
            f = float(0.5 * np.mean(r * r))
            d = r / self.n
        return f, float(d.sum()), self.Z.T @ d

    def norms(self, a):
        return np.sqrt(np.add.reduceat(a * a, self.starts))

    def penalty(self, a, spec):
        return float(np.dot(self.w, penalty_value(self.norms(a), spec)))

    def prox(self, v, t, spec):
        nv = self.norms(v)
        r = radial_prox(nv, t * self.w, spec)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(nv > 0, r / nv, 0.0)
        return v * f[self.owner]

    def lipschitz(self):
        M = np.column_stack([np.ones(self.n), self.Z])
        L = np.linalg.norm(M, 2) ** 2 / self.n
        return 0.25 * L if self.binary else L

    def step_floor(self, spec):
        # keep t*w inside the regime where the nonconvex prox is single-valued
        if spec.kind == "MCP":
            return 1.01 * self.w.max() / spec.gamma
        if spec.kind == "SCAD":
            return 1.01 * self.w.max() / (spec.gamma - 1)
        return 0.0


def _sigmoid(eta):
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def logistic_loss_grad(X, y, b0, beta):
    """Mean logistic loss and its gradient in ``(b0, beta)``."""
    eta = b0 + X @ beta
    f = float(np.mean(np.logaddexp(0.0, eta) - y * eta))
    d = (_sigmoid(eta) - y) / len(y)
    return f, float(d.sum()), X.T @ d


def lambda_max(design: Design, groups: GroupingStructure) -> float:
    """Smallest lambda whose solution has every latent group at zero.

    Computed from the group-wise norms of the null-model gradient divided by
    the group weights, inflated by a 1e-9 relative margin against rounding.
    """
    prob = _Problem(design, groups)
    b0 = prob.null_intercept()
    _, _, g = prob.loss_grad(b0, np.zeros(prob.cols.size))
    return float(np.max(prob.norms(g) / prob.w)) * (1 + _LAMBDA_MAX_MARGIN)


def _fista(prob, spec, b0, a, config, L):
    F = prob.loss(b0, a) + prob.penalty(a, spec)
    history = [F]
    xb, xa = b0, a
    yb, ya = b0, a.copy()
    t = 1.0
    converged = False
    it = 0
    while it < config.max_iter:
        it += 1
        f_y, gb, ga = prob.loss_grad(yb, ya)
        while True:
            zb = yb - gb / L
            za = prob.prox(ya - ga / L, 1.0 / L, spec)
            db, da = zb - yb, za - ya
            f_z = prob.loss(zb, za)
            quad = f_y + gb * db + ga @ da + 0.5 * L * (db * db + da @ da)
            if f_z <= quad + 1e-12 * abs(quad):
                break
            L *= 2.0
        F_z = f_z + prob.penalty(za, spec)
        if F_z > F and t > 1.0:
            # momentum overshoot: restart from the last accepted iterate
            t = 1.0
            yb, ya = xb, xa.copy()
            continue
        if (yb - zb) * (zb - xb) + (ya - za) @ (za - xa) > 0:
            # momentum points uphill: drop it for the next step
            t = 1.0
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        mom = (t - 1.0) / t_next
        yb = zb + mom * (zb - xb)
        ya = za + mom * (za - xa)
        xb, xa, t = zb, za, t_next
        F_prev, F = F, F_z
        history.append(F)
        # the objective alone can stall while the iterate still moves
        step = max(abs(db), float(np.max(np.abs(da), initial=0.0)))
        size = max(1.0, abs(zb), float(np.max(np.abs(za), initial=0.0)))
        if abs(F_prev - F) <= config.tol * max(abs(F), np.finfo(float).tiny) and step <= config.tol * size:
            converged = True
            break
    return xb, xa, F, it, converged, history, L


def fit_logl(
    design: Design,
    groups: GroupingStructure,
    spec: PenaltySpec,
    config: FitConfig | None = None,
    init: FitResult | None = None,
    _problem: _Problem | None = None,
) -> FitResult:
    """Minimize loss + sum_g w_g * P(||alpha_g||) over the latent coefficients.

    ``init`` warm-starts from a previous fit on the same design and grouping;
    otherwise the latent coefficients start at zero and the intercept at its
    null-model value. Hitting ``max_iter`` emits :class:`NotConverged` and
    returns the last iterate with ``converged=False``.
    """
    config = config or FitConfig()
    prob = _problem or _Problem(design, groups)
    if init is not None:
        a0 = np.concatenate(init.latent.blocks)
        b0 = init.intercept_std
    else:
        a0 = np.zeros(prob.cols.size)
        b0 = prob.null_intercept()
    floor = prob.step_floor(spec)
    L = max(prob.lipschitz(), floor)
    b, a, F, it, converged, history, _ = _fista(prob, spec, b0, a0, config, L)
    if not converged:
        warnings.warn(
            f"no convergence after {it} iterations at lambda={spec.lam:g}", NotConverged,
            stacklevel=2,
        )
    return _result(prob, spec, b, a, F, it, converged, history)


def _result(prob, spec, b, a, F, it, converged, history):
    groups = prob.groups
    blocks = tuple(
        a[s:s + len(g)].copy() for s, g in zip(prob.starts, groups.groups)
    )
    latent = LatentCoeffs(groups.groups, blocks, prob.design.p)
    beta_std = latent.beta()
    selected = tuple(i for i, blk in enumerate(blocks) if np.any(blk != 0))
    mask = 0
    for i in selected:
        mask |= groups.groups[i].mask
    d = prob.design
    beta = beta_std / d.scale
    intercept = float(b - np.dot(beta, d.mean))
    return FitResult(
        beta=beta,
        intercept=intercept,
        beta_std=beta_std,
        intercept_std=float(b),
        latent=latent,
        selected_groups=selected,
        support=VarSet(d.registry, mask),
        lam=spec.lam,
        penalty=spec,
        objective=F,
        iterations=it,
        converged=converged,
        outcome_kind=d.outcome_kind,
        history=history,
    )


def lambda_grid(lam_max: float, n_lambda: int, lambda_min_ratio: float) -> np.ndarray:
    if n_lambda < 2:
        raise ValueError("a path needs at least two lambda values")
    if not 0 < lambda_min_ratio < 1:
        raise ValueError("lambda_min_ratio must lie in (0, 1)")
    return lam_max * np.geomspace(1.0, lambda_min_ratio, n_lambda)


def fit_path(
    design: Design,
    groups: GroupingStructure,
    kind: str = "L2",
    gamma: float | None = None,
    n_lambda: int = 20,
    lambda_min_ratio: float = 0.01,
    lambdas=None,
    config: FitConfig | None = None,
) -> list[FitResult]:
    """Warm-started fits over a decreasing geometric lambda grid.

    ``lambdas`` overrides the grid (it is used in decreasing order as given).
    """
    prob = _Problem(design, groups)
    if lambdas is None:
        lambdas = lambda_grid(lambda_max(design, groups), n_lambda, lambda_min_ratio)
    base = PenaltySpec(kind, 0.0, gamma)
    out = []
    prev = None
    for lam in lambdas:
        fit = fit_logl(design, groups, base.with_lambda(float(lam)), config, prev, _problem=prob)
        out.append(fit)
        prev = fit
    sizes = [len(f.support) for f in out]
    mono = sum(b >= a for a, b in zip(sizes, sizes[1:]))
    log.debug("path support sizes %s (%d/%d non-decreasing steps)", sizes, mono, len(sizes) - 1)
    return out


def fit_lasso(design: Design, lam: float, weights=None, config: FitConfig | None = None):
    """Plain (or weighted) lasso as the all-singleton special case."""
    groups = GroupingStructure.singletons(design.registry, weights)
    return fit_logl(design, groups, PenaltySpec("L2", lam), config)


def adaptive_weights(design: Design, power: float = 1.0, ratio: float = 1e-3,
                     config: FitConfig | None = None) -> np.ndarray:
    """Adaptive-lasso weights ``1/|b_j|**power`` from a lightly penalized fit."""
    groups = GroupingStructure.singletons(design.registry)
    lam = lambda_max(design, groups) * ratio
    init = fit_logl(design, groups, PenaltySpec("L2", lam), config)
    b = np.abs(init.beta_std)
    return 1.0 / np.maximum(b, 1e-8) ** power
