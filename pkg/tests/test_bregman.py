import json
import math

import mpmath as mp
import numpy as np
import pytest
from scipy.optimize import minimize

from genbregman.bregman import (ConstraintSet, ProjectionResult, PythagorasResult, bregman_div,
                                left_project, project, project_many, pythagoras_check,
                                right_project)
from genbregman.config import DEFAULTS
from genbregman.errors import (ConvergenceError, DimensionError, InfeasibleError,
                               ValidationError)
from genbregman.potentials import PotentialSpec, build_norm_integral_potential


def specs(dim):
    return [
        PotentialSpec.make("neg-entropy", dim),
        PotentialSpec.make("burg", dim),
        PotentialSpec.make("fermi-dirac", dim),
        PotentialSpec.make("gamma-norm", dim, gamma=0.5),
        PotentialSpec.make("gamma-norm", dim, gamma=0.35),
        PotentialSpec.make("alpha-power", dim, alpha=0.5),
        PotentialSpec.make("alpha-power", dim, alpha=-1.0),
        PotentialSpec.make("exp", dim),
        build_norm_integral_potential({"power": {"coef": 1.0, "exponent": 2.0}}, "euclidean", dim),
    ]


def sid(s):
    return s.family + "".join(f"-{v}" for v in s.params.values() if isinstance(v, float))


# --- divergence values ---------------------------------------------------------------------


def test_negentropy_example():
    spec = PotentialSpec.make("neg-entropy", 1)
    assert bregman_div(spec, [1.0], [math.e]) == pytest.approx(math.e - 2, rel=1e-14)


def test_burg_example():
    spec = PotentialSpec.make("burg", 1)
    oracle = float(-mp.log(2) + 2 - 1)
    assert bregman_div(spec, [2.0], [1.0]) == pytest.approx(oracle, rel=1e-14)
    assert oracle == pytest.approx(0.306853, abs=1e-6)


def test_fermi_dirac_example():
    spec = PotentialSpec.make("fermi-dirac", 1)
    x, y = mp.mpf("0.5"), mp.mpf("0.25")
    F = lambda t: t * mp.log(t) + (1 - t) * mp.log(1 - t)
    oracle = float(F(x) - F(y) - (x - y) * mp.log(y / (1 - y)))
    assert oracle == pytest.approx(0.143841, abs=1e-6)
    assert bregman_div(spec, [0.5], [0.25]) == pytest.approx(oracle, rel=1e-13)


@pytest.mark.parametrize("spec", specs(3), ids=sid)
def test_zero_on_diagonal(spec):
    for x in spec.sample_interior(np.random.default_rng(0), 20):
        assert bregman_div(spec, x, x) == 0.0


def test_infinite_outside_domain():
    burg = PotentialSpec.make("burg", 2)
    assert bregman_div(burg, [1.0, 1.0], [0.0, 1.0]) == math.inf
    assert bregman_div(burg, [-1.0, 1.0], [1.0, 1.0]) == math.inf
    ne = PotentialSpec.make("neg-entropy", 1)
    # boundary points of efd are fine in the first argument
    assert bregman_div(ne, [0.0], [1.0]) == pytest.approx(1.0)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        bregman_div(PotentialSpec.make("burg", 2), [1.0], [1.0, 2.0])


@pytest.mark.parametrize("spec", specs(3), ids=sid)
def test_information_axiom(spec):
    rng = np.random.default_rng(11)
    xs = spec.sample_interior(rng, 1000)
    ys = spec.sample_interior(rng, 1000)
    for x, y in zip(xs, ys):
        d = bregman_div(spec, x, y)
        assert d >= -1e-12
        if np.max(np.abs(x - y)) > 1e-9:
            assert d > 1e-10 or np.max(np.abs(x - y)) < 1e-4


@pytest.mark.parametrize("spec", specs(3), ids=sid)
def test_three_point_identity(spec):
    rng = np.random.default_rng(12)
    for x, y, z in zip(*(spec.sample_interior(rng, 100) for _ in range(3))):
        lhs = bregman_div(spec, x, z)
        cross = (x - y) @ (spec.grad(y) - spec.grad(z))
        rhs = bregman_div(spec, x, y) + bregman_div(spec, y, z) + cross
        scale = 1 + abs(lhs) + np.abs(x - y) @ (np.abs(spec.grad(y)) + np.abs(spec.grad(z)))
        assert abs(lhs - rhs) <= 1e-10 * scale


@pytest.mark.parametrize("spec", specs(2), ids=sid)
def test_divergence_convex_in_first_argument(spec):
    rng = np.random.default_rng(13)
    y = spec.sample_interior(rng, 1)[0]
    for a, b in zip(spec.sample_interior(rng, 200), spec.sample_interior(rng, 200)):
        mid = bregman_div(spec, 0.5 * (a + b), y)
        assert 0.5 * bregman_div(spec, a, y) + 0.5 * bregman_div(spec, b, y) - mid >= -1e-12 * (1 + mid)


# --- constraint sets ---------------------------------------------------------------------


def test_affine_rank_validated():
    with pytest.raises(ValidationError):
        ConstraintSet.affine([[1, 1], [2, 2]], [1, 2])
    with pytest.raises(ValidationError):
        ConstraintSet.affine([[1, 0], [0, 1], [1, 1]], [1, 1, 2])


@pytest.mark.parametrize("C", [
    ConstraintSet.affine([[1.0, 2.0, 3.0]], [1.0]),
    ConstraintSet.halfspaces([([1.0, 0.0, 0.0], 2.0), ([0.0, -1.0, 1.0], 0.5)]),
    ConstraintSet.box([0.0, -math.inf, 1.0], [1.0, 2.0, math.inf]),
    ConstraintSet.simplex(2.5, 3),
    ConstraintSet.simplex(1.0, 3).intersect(ConstraintSet.box(0.1, 0.6, dim=3)),
    ConstraintSet.affine([[1.0, 1.0, 1.0]], [2.0], coords="dual"),
])
def test_constraint_json_round_trip(C):
    back = ConstraintSet.from_json(json.loads(json.dumps(C.to_json())))
    assert back.to_json() == C.to_json()
    rng = np.random.default_rng(0)
    for x in rng.uniform(-1, 3, (20, 3)):
        assert back.violation(x) == C.violation(x)


def test_constraint_unknown_field_rejected():
    with pytest.raises(ValidationError):
        ConstraintSet.from_json({"kind": "simplex", "dim": 2, "total": 1, "extra": 0})


def test_contains_and_violation():
    C = ConstraintSet.simplex(1.0, 2)
    assert C.contains([0.25, 0.75])
    assert not C.contains([0.5, 0.75])
    assert C.violation([-0.1, 1.1]) == pytest.approx(0.1)


# --- left projections ----------------------------------------------------------------------


def test_left_example_negentropy_simplex():
    spec = PotentialSpec.make("neg-entropy", 2)
    res = left_project(spec, ConstraintSet.affine([[1, 1]], [1.0]), [1.0, 3.0])
    np.testing.assert_allclose(res.point, [0.25, 0.75], atol=1e-12)
    assert res.side == "left" and res.kkt_residual <= DEFAULTS.kkt


@pytest.mark.parametrize("spec", specs(2), ids=sid)
def test_left_y_in_C_returns_y(spec):
    y = spec.sample_interior(np.random.default_rng(3), 1)[0]
    C = ConstraintSet.affine([[1.0, -2.0]], [y[0] - 2 * y[1]])
    res = left_project(spec, C, y)
    np.testing.assert_allclose(res.point, y, atol=1e-12)
    assert res.value == pytest.approx(0.0, abs=1e-14)


def test_left_example_euclidean_halfspace():
    spec = PotentialSpec.make("gamma-norm", 2, gamma=0.5)
    res = left_project(spec, ConstraintSet.halfspaces([([1.0, 0.0], 0.0)]), [1.0, 0.0])
    np.testing.assert_allclose(res.point, [0.0, 0.0], atol=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_negentropy_affine_projection_is_scaling(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    y = rng.uniform(0.05, 5, n)
    s = float(rng.uniform(0.3, 4))
    res = left_project(PotentialSpec.make("neg-entropy", n), ConstraintSet.simplex(s, n), y)
    np.testing.assert_allclose(res.point, y * s / y.sum(), atol=1e-9)


def slsqp_oracle(spec, C, y, side):
    """Independent oracle with scipy's SLSQP started from a feasible point."""
    A, b, G, h = C.linear_form()
    lo, hi = spec.interior_bounds()
    cons = []
    if A.shape[0]:
        cons.append({"type": "eq", "fun": lambda x: A @ x - b, "jac": lambda x: A})
    if G.shape[0]:
        cons.append({"type": "ineq", "fun": lambda x: h - G @ x, "jac": lambda x: -G})
    eps = 1e-9
    bounds = [(lo + eps if math.isfinite(lo) else None, hi - eps if math.isfinite(hi) else None)] * spec.dim
    if side == "left":
        f = lambda x: bregman_div(spec, x, y)
        jac = lambda x: spec.grad(x) - spec.grad(y)
    else:
        f = lambda x: bregman_div(spec, y, x)
        jac = lambda x: spec.hess(x) @ (x - y)
    x0 = left_project(PotentialSpec.make("gamma-norm", spec.dim, gamma=0.5), C, y).point
    x0 = np.clip(x0, lo + 1e-3 if math.isfinite(lo) else -np.inf, hi - 1e-3 if math.isfinite(hi) else np.inf)
    r = minimize(f, x0, jac=jac, method="SLSQP", constraints=cons, bounds=bounds,
                 options={"ftol": 1e-15, "maxiter": 500})
    return r.x, f(r.x)


CONSTRAINTS2 = {
    "affine": ConstraintSet.affine([[1.0, 2.0]], [1.5]),
    "halfspace": ConstraintSet.halfspaces([([1.0, 1.0], 0.6)]),
    "box": ConstraintSet.box([0.2, 0.3], [0.4, 0.5]),
}


@pytest.mark.parametrize("kind", sorted(CONSTRAINTS2))
@pytest.mark.parametrize("spec", specs(2), ids=sid)
def test_left_projection_against_slsqp(spec, kind):
    C = CONSTRAINTS2[kind]
    rng = np.random.default_rng(21)
    for y in spec.sample_interior(rng, 3):
        res = left_project(spec, C, y)
        assert C.violation(res.point) <= 1e-8
        _, fo = slsqp_oracle(spec, C, y, "left")
        assert res.value <= fo + 1e-8 * (1 + abs(fo))


@pytest.mark.parametrize("kind", sorted(CONSTRAINTS2))
@pytest.mark.parametrize("spec", specs(2), ids=sid)
def test_right_projection_against_slsqp(spec, kind):
    C = CONSTRAINTS2[kind]
    rng = np.random.default_rng(22)
    for y in spec.sample_interior(rng, 3):
        res = right_project(spec, C, y)
        assert C.violation(res.point) <= 1e-8
        _, fo = slsqp_oracle(spec, C, y, "right")
        assert res.value <= fo + 1e-8 * (1 + abs(fo))


def test_right_examples():
    e = PotentialSpec.make("gamma-norm", 2, gamma=0.5)
    np.testing.assert_allclose(right_project(e, ConstraintSet.affine([[1, 0]], [2.0]), [0.0, 0.0]).point,
                               [2.0, 0.0], atol=1e-10)
    ne = PotentialSpec.make("neg-entropy", 2)
    np.testing.assert_allclose(right_project(ne, ConstraintSet.affine([[1, 1]], [2.0]), [0.5, 0.5]).point,
                               [1.0, 1.0], atol=1e-10)
    y = np.array([0.3, 0.7])
    C = ConstraintSet.affine([[1.0, -1.0]], [-0.4])
    np.testing.assert_allclose(right_project(ne, C, y).point, y, atol=1e-12)


def test_right_projection_dual_coordinates():
    spec = PotentialSpec.make("neg-entropy", 3)
    C = ConstraintSet.affine([[1.0, 1.0, 1.0]], [0.0], coords="dual")
    y = np.array([0.5, 2.0, 1.5])
    res = right_project(spec, C, y)
    assert np.sum(np.log(res.point)) == pytest.approx(0.0, abs=1e-9)
    # stationarity in eta: exp(eta) - y is normal to {sum eta = 0}, so x - y is constant
    shift = res.point - y
    np.testing.assert_allclose(shift, shift[0], atol=1e-9)
    lam = float(shift[0])
    assert np.sum(np.log(y + lam)) == pytest.approx(0.0, abs=1e-9)


def test_left_right_differ_for_asymmetric_family():
    spec = PotentialSpec.make("burg", 2)
    C = ConstraintSet.affine([[1.0, 1.0]], [2.0])
    y = np.array([0.3, 4.0])
    assert np.max(np.abs(left_project(spec, C, y).point - right_project(spec, C, y).point)) > 1e-3


def test_infeasible_set():
    spec = PotentialSpec.make("neg-entropy", 2)
    C = ConstraintSet.halfspaces([([1.0, 1.0], -1.0)])
    with pytest.raises(InfeasibleError):
        left_project(spec, C, [1.0, 1.0])
    with pytest.raises(InfeasibleError):
        left_project(spec, ConstraintSet.simplex(-1.0 + 2.0, 2).intersect(
            ConstraintSet.box(0.8, 0.9, dim=2)), [1.0, 1.0])


def test_iteration_cap_raises_convergence_error_with_best_iterate():
    spec = PotentialSpec.make("burg", 3)
    C = ConstraintSet.box([0.5, 0.5, 0.5], [0.6, 2.0, 3.0])
    with pytest.raises(ConvergenceError) as info:
        left_project(spec, C, [5.0, 0.1, 1.0], tol=DEFAULTS.updated({"max_iter": 1}))
    assert info.value.best is not None and len(info.value.best) == 3


def test_trace_recorded():
    spec = PotentialSpec.make("neg-entropy", 2)
    res = left_project(spec, ConstraintSet.box(0.1, 0.5, dim=2), [1.0, 0.2], trace=True)
    assert res.trace and len(res.trace) >= 1
    doc = json.loads(json.dumps(res.to_json(trace=True)))
    back = ProjectionResult.from_json(doc)
    np.testing.assert_array_equal(back.point, res.point)
    assert back.trace == res.trace


# --- projection invariants ----------------------------------------------------------------


def _feasible_points(C, rng, k):
    """Random points of C by mixing the Euclidean projections of random points."""
    e = PotentialSpec.make("gamma-norm", C.ambient_dim, gamma=0.5)
    pts = [left_project(e, C, z).point for z in rng.uniform(0.05, 0.95, (k, C.ambient_dim))]
    return np.array(pts)


@pytest.mark.parametrize("spec", specs(3), ids=sid)
def test_projection_optimality_affine_and_convex(spec):
    rng = np.random.default_rng(31)
    lo, hi = spec.interior_bounds()
    affine = ConstraintSet.affine([[1.0, 1.0, 1.0]], [1.2])
    box = ConstraintSet.box(0.2, 0.6, dim=3)
    y = spec.sample_interior(rng, 1)[0]
    for C, equality in ((affine, True), (box, False)):
        P = left_project(spec, C, y).point
        for x in _feasible_points(C, rng, 100):
            if not spec.in_interior(x):
                continue
            lhs = bregman_div(spec, x, P) + bregman_div(spec, P, y)
            rhs = bregman_div(spec, x, y)
            assert rhs >= lhs - 1e-8 * (1 + rhs)
            if equality:
                assert abs(rhs - lhs) <= 1e-6 * (1 + rhs)


@pytest.mark.parametrize("spec", specs(3)[:4], ids=sid)
def test_uniqueness_under_restarts(spec):
    rng = np.random.default_rng(32)
    C = ConstraintSet.simplex(1.0, 3).intersect(ConstraintSet.box(0.05, 0.7, dim=3))
    y = spec.sample_interior(rng, 1)[0]
    ref = left_project(spec, C, y).point
    starts = _feasible_points(ConstraintSet.simplex(1.0, 3).intersect(
        ConstraintSet.box(0.1, 0.6, dim=3)), rng, 10)
    for x0 in starts:
        np.testing.assert_allclose(left_project(spec, C, y, x0=x0).point, ref, atol=1e-7)


@pytest.mark.parametrize("spec", specs(2)[:4], ids=sid)
def test_continuity_in_y(spec):
    C = ConstraintSet.halfspaces([([1.0, 1.0], 0.9)])
    y = np.array([0.7, 0.6])  # outside C, so the projection moves with y
    P = left_project(spec, C, y).point
    d = np.array([0.3, -0.2])
    moves = [np.linalg.norm(left_project(spec, C, y + delta * d).point - P)
             for delta in (1e-3, 1e-4, 1e-5)]
    assert moves[0] > moves[1] > moves[2]


def test_project_many_is_order_independent():
    spec = PotentialSpec.make("burg", 2)
    C = ConstraintSet.box(0.5, 1.5, dim=2)
    ys = np.random.default_rng(5).uniform(0.1, 3, (12, 2))
    serial = project_many(spec, C, ys, "left", workers=1)
    parallel = project_many(spec, C, ys, "left", workers=4)
    for a, b in zip(serial, parallel):
        np.testing.assert_array_equal(a.point, b.point)


def test_project_dispatch_rejects_bad_side():
    with pytest.raises(ValidationError):
        project(PotentialSpec.make("burg", 1), ConstraintSet.box(1, 2, dim=1), [1.5], "middle")


# --- Pythagoras --------------------------------------------------------------------------


def test_pythagoras_affine_example():
    spec = PotentialSpec.make("neg-entropy", 2)
    res = pythagoras_check(spec, ConstraintSet.affine([[1, 1]], [1.0]), [0.5, 0.5], [1.0, 3.0])
    np.testing.assert_allclose(res.projection.point, [0.25, 0.75], atol=1e-12)
    assert abs(res.slack) <= 1e-12


def test_pythagoras_x_equal_projection():
    spec = PotentialSpec.make("burg", 2)
    C = ConstraintSet.box(0.5, 1.0, dim=2)
    y = np.array([2.0, 0.3])
    P = left_project(spec, C, y).point
    assert pythagoras_check(spec, C, P, y).slack == pytest.approx(0.0, abs=1e-12)


def test_pythagoras_euclidean_box_orientation():
    spec = PotentialSpec.make("gamma-norm", 2, gamma=0.5)
    res = pythagoras_check(spec, ConstraintSet.box(0.0, 1.0, dim=2), [0.0, 1.0], [2.0, 0.5])
    np.testing.assert_allclose(res.projection.point, [1.0, 0.5], atol=1e-9)
    assert res.lhs == pytest.approx(1.125, abs=1e-9)
    assert res.rhs == pytest.approx(2.125, abs=1e-9)
    assert res.slack == pytest.approx(1.0, abs=1e-9) and res.slack >= 0
    # the inequality written as D(x,P) + D(P,y) >= D(x,y) fails on this instance
    assert not res.lhs >= res.rhs


@pytest.mark.parametrize("spec", specs(3), ids=sid)
def test_pythagoras_right_side_dual_affine(spec):
    rng = np.random.default_rng(41)
    C = ConstraintSet.affine([[1.0, -1.0, 0.5]], [0.0], coords="dual")
    y = spec.sample_interior(rng, 1)[0]
    for _ in range(5):
        x = spec.sample_interior(rng, 1)[0]
        eta = spec.grad(x)
        eta = eta - (C.A[0] @ eta) / (C.A[0] @ C.A[0]) * C.A[0]
        if not spec.in_dual_interior(eta):
            continue
        x = spec.grad_conjugate(eta)
        res = pythagoras_check(spec, C, x, y, "right")
        assert abs(res.slack) <= 1e-6 * (1 + res.rhs)


def test_pythagoras_result_json():
    spec = PotentialSpec.make("neg-entropy", 2)
    res = pythagoras_check(spec, ConstraintSet.simplex(1.0, 2), [0.4, 0.6], [1.0, 2.0])
    back = PythagorasResult.from_json(json.loads(json.dumps(res.to_json())))
    assert back.slack == res.slack and back.lhs == res.lhs


def test_threshold_band_of_the_information_axiom():
    # distinct points 4.6e-6 apart: D is positive but below 1e-10, so a
    # threshold test "D <= 1e-10 iff |x - y| <= 1e-9" cannot hold for them
    spec = PotentialSpec.make("fermi-dirac", 1)
    d = bregman_div(spec, [0.17488079], [0.17488542])
    assert 0.0 < d < 1e-10


@pytest.mark.parametrize("side", ["left", "right"])
def test_box_with_pinned_coordinate(side):
    # Burg is separable, so the projection onto a box is coordinatewise clipping
    spec = PotentialSpec.make("burg", 3)
    C = ConstraintSet.box([0.5, 0.2, 1.0], [0.5, 2.0, 3.0])
    res = project(spec, C, [1.0, 3.0, 1.5], side)
    assert np.allclose(res.point, [0.5, 2.0, 1.5], atol=1e-8)
