"""Group penalties (L2, MCP, SCAD) and their proximal maps.

A group penalty is a function of the Euclidean norm ``x`` of a latent group
vector. The proximal map of ``s * P(||u||)`` acts radially, so it reduces to
the scalar problem ``min_r 0.5 * (r - a)**2 + s * P(r)`` with ``a = ||v||``.
Every piece of ``P`` is quadratic in ``r``, hence the global minimizer is one
of a handful of candidates: piece endpoints and clipped stationary points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidGamma

DEFAULT_GAMMA = {"MCP": 3.0, "SCAD": 4.0}


@dataclass(frozen=True)
class PenaltySpec:
    kind: str = "L2"
    lam: float = 0.0
    gamma: float | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in ("L2", "MCP", "SCAD"):
            raise ValueError(f"unknown penalty {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        gamma = self.gamma
        if gamma is None and kind != "L2":
            gamma = DEFAULT_GAMMA[kind]
        if kind == "MCP" and not gamma > 1:
            raise InvalidGamma(f"MCP needs gamma > 1, got {gamma}")
        if kind == "SCAD" and not gamma > 2:
            raise InvalidGamma(f"SCAD needs gamma > 2, got {gamma}")
        object.__setattr__(self, "gamma", None if gamma is None else float(gamma))

    def with_lambda(self, lam: float) -> PenaltySpec:
        return PenaltySpec(self.kind, lam, self.gamma)


def penalty_value(x, spec: PenaltySpec):
    """Penalty at group norm ``x >= 0`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    lam, g = spec.lam, spec.gamma
    if spec.kind == "L2":
        out = lam * x
    elif spec.kind == "MCP":
        out = np.where(x <= g * lam, lam * x - x * x / (2 * g), 0.5 * g * lam * lam)
    else:
        mid = (2 * g * lam * x - x * x - lam * lam) / (2 * (g - 1))
        out = np.where(
            x <= lam, lam * x, np.where(x < g * lam, mid, lam * lam * (g + 1) / 2)
        )
    return out if out.ndim else float(out)


def penalty_derivative_at_zero(spec: PenaltySpec) -> float:
    """Right derivative of the penalty at 0; equal to lambda for all three."""
    return spec.lam


def _phi(r, a, s, spec):
    return 0.5 * (r - a) ** 2 + s * penalty_value(r, spec)


def radial_prox(a, s, spec: PenaltySpec) -> np.ndarray:
    """Global minimizer ``r >= 0`` of ``0.5*(r-a)**2 + s*P(r)``, elementwise.

    Ties go to the smallest candidate radius, zero first.
    """
    a = np.asarray(a, dtype=float)
    s = np.broadcast_to(np.asarray(s, dtype=float), a.shape)
    lam, g = spec.lam, spec.gamma
    if spec.kind == "L2":
        return np.maximum(a - s * lam, 0.0)
    zero = np.zeros_like(a)
    if spec.kind == "MCP":
        knot = g * lam
        curv = 1.0 - s / g
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = np.where(curv > 0, (a - s * lam) / curv, 0.0)
        cands = [zero, np.clip(inner, 0.0, knot), np.full_like(a, knot), np.maximum(a, knot)]
    else:
        k1, k2 = lam, g * lam
        curv = 1.0 - s / (g - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            mid = np.where(curv > 0, (a - s * g * lam / (g - 1)) / curv, k1)
        cands = [
            zero,
            np.clip(a - s * lam, 0.0, k1),
            np.full_like(a, k1),
            np.clip(mid, k1, k2),
            np.full_like(a, k2),
            np.maximum(a, k2),
        ]
    C = np.stack(cands, axis=-1)
    vals = _phi(C, a[..., None], s[..., None], spec)
    best = vals.min(axis=-1, keepdims=True)
    # smallest radius among the minimizers
    C = np.where(vals <= best, C, np.inf)
    return C.min(axis=-1)


def group_prox(v, w: float, t: float, spec: PenaltySpec) -> np.ndarray:
    """argmin_u 0.5*||u - v||**2 + t*w*P(||u||)."""
    if t <= 0:
        raise ValueError("step size must be positive")
    v = np.asarray(v, dtype=float)
    a = float(np.linalg.norm(v))
    if a == 0.0:
        return np.zeros_like(v)
    r = float(radial_prox(a, t * w, spec))
    return v * (r / a)
