import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import penalty_scalar, radial_minimizer
from structsel.errors import InvalidGamma
from structsel.model.penalties import (
    PenaltySpec,
    group_prox,
    penalty_derivative_at_zero,
    penalty_value,
    radial_prox,
)


def test_examples():
    assert penalty_value(3.0, PenaltySpec("L2", 2.0)) == 6.0
    mcp = PenaltySpec("MCP", 1.0, 3.0)
    assert penalty_value(3.0, mcp) == pytest.approx(1.5)
    assert penalty_value(10.0, mcp) == 1.5
    scad = PenaltySpec("SCAD", 1.0, 4.0)
    assert penalty_value(1.0, scad) == 1.0
    assert penalty_value(4.0, scad) == pytest.approx(2.5)
    assert penalty_value(9.0, scad) == 2.5


def test_default_gammas():
    assert PenaltySpec("MCP", 1.0).gamma == 3.0
    assert PenaltySpec("SCAD", 1.0).gamma == 4.0
    assert PenaltySpec("l2", 1.0).kind == "L2"


def test_gamma_ranges():
    with pytest.raises(InvalidGamma):
        PenaltySpec("MCP", 1.0, 1.0)
    with pytest.raises(InvalidGamma):
        PenaltySpec("SCAD", 1.0, 2.0)
    with pytest.raises(ValueError):
        PenaltySpec("L1", 1.0)
    with pytest.raises(ValueError):
        PenaltySpec("L2", -1.0)


@given(
    st.sampled_from(["L2", "MCP", "SCAD"]),
    st.floats(0.01, 5.0),
    st.floats(2.05, 10.0),
    st.floats(0.0, 60.0),
)
def test_value_matches_formula(kind, lam, gamma, x):
    spec = PenaltySpec(kind, lam, gamma if kind != "L2" else None)
    want = penalty_scalar(x, kind, lam, spec.gamma)
    assert penalty_value(x, spec) == pytest.approx(want, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("kind", ["L2", "MCP", "SCAD"])
def test_vectorized_value(kind):
    spec = PenaltySpec(kind, 0.7)
    x = np.linspace(0, 5, 11)
    assert np.allclose(penalty_value(x, spec), [penalty_value(v, spec) for v in x])


def test_derivative_at_zero():
    for kind in ("L2", "MCP", "SCAD"):
        spec = PenaltySpec(kind, 0.4)
        h = 1e-8
        assert penalty_value(h, spec) / h == pytest.approx(penalty_derivative_at_zero(spec), rel=1e-6)


def test_block_soft_threshold():
    out = group_prox(np.array([3.0, 4.0]), 1.0, 1.0, PenaltySpec("L2", 2.5))
    assert np.allclose(out, [1.5, 2.0])


@pytest.mark.parametrize("kind", ["L2", "MCP", "SCAD"])
def test_prox_of_zero(kind):
    assert np.array_equal(group_prox(np.zeros(3), 1.0, 1.0, PenaltySpec(kind, 1.0)), np.zeros(3))


def test_prox_rejects_bad_step():
    with pytest.raises(ValueError):
        group_prox(np.ones(2), 1.0, 0.0, PenaltySpec("L2", 1.0))


def prox_objective(u, v, s, spec):
    return 0.5 * np.sum((u - v) ** 2) + s * penalty_value(float(np.linalg.norm(u)), spec)


@given(
    st.sampled_from(["L2", "MCP", "SCAD"]),
    st.floats(0.05, 3.0),
    st.floats(0.1, 6.0),
    st.lists(st.floats(-8, 8), min_size=1, max_size=4),
)
@settings(max_examples=300, deadline=None)
def test_prox_beats_identity_and_zero(kind, lam, s, v):
    spec = PenaltySpec(kind, lam)
    v = np.array(v)
    u = group_prox(v, 1.0, s, spec)
    f = prox_objective(u, v, s, spec)
    assert f <= prox_objective(v, v, s, spec) + 1e-12
    assert f <= prox_objective(np.zeros_like(v), v, s, spec) + 1e-12
    # prox is radial: the output is a non-negative multiple of v
    if np.linalg.norm(u) > 0:
        assert np.allclose(u / np.linalg.norm(u), v / np.linalg.norm(v))


def test_mcp_prox_matches_numerical_minimizer():
    rng = np.random.default_rng(11)
    spec = PenaltySpec("MCP", 1.0, 3.0)
    for _ in range(100):
        v = rng.normal(scale=2.5, size=rng.integers(1, 5))
        u = group_prox(v, 1.0, 1.0, spec)
        r = radial_minimizer(float(np.linalg.norm(v)), 1.0, "MCP", 1.0, 3.0)
        assert abs(np.linalg.norm(u) - r) < 1e-6


def test_nonconvex_hard_threshold():
    # with s > gamma MCP thresholds hard at a = sqrt(s*gamma)*lam
    spec = PenaltySpec("MCP", 1.0, 2.0)
    s = 4.0
    a = np.sqrt(s * spec.gamma) * spec.lam
    assert radial_prox(a * (1 - 1e-9), s, spec) == 0.0
    assert radial_prox(a * (1 + 1e-9), s, spec) == pytest.approx(a)


def test_exact_tie_goes_to_zero():
    # a = 2, s = 2: phi(0) = 2 and phi(knot = 2) = 0 + 2 * P(2) = 2
    assert radial_prox(2.0, 2.0, PenaltySpec("MCP", 1.0, 2.0)) == 0.0


def test_radial_prox_is_monotone_in_a():
    for kind in ("L2", "MCP", "SCAD"):
        spec = PenaltySpec(kind, 1.0)
        a = np.linspace(0, 10, 2001)
        r = radial_prox(a, 1.5, spec)
        assert np.all(np.diff(r) >= -1e-12)
        assert np.all(r <= a + 1e-12)
