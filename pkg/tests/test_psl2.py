import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horoflow.psl2 import (
    BASE_POINT,
    FlowKind,
    TangentPoint,
    UnimodularMatrix,
    compose,
    dist,
    dist_arrays,
    flow,
    geodesic_matrix,
    horocycle_neg_matrix,
    horocycle_pos_matrix,
    moebius_apply,
    phi,
    phi_arrays,
    phi_inv,
    tangent_apply,
)

reals = st.floats(-3, 3, allow_nan=False)
angles = st.floats(0, 2 * math.pi, exclude_max=True)
heights = st.floats(-2, 2).map(math.exp)
points = st.builds(TangentPoint, reals, heights, angles)


@st.composite
def matrices(draw):
    a, b, c = draw(reals), draw(reals), draw(reals)
    if abs(a) < 0.3:
        a = math.copysign(0.3 + abs(a), a)
    return UnimodularMatrix(a, b, c, (1 + b * c) / a)


@st.composite
def small_int_matrices(draw):
    # entries in [-10, 10]; integer matrices keep the determinant exact
    a, b, c = (draw(st.integers(-10, 10)) for _ in range(3))
    d = draw(st.integers(-10, 10))
    if a * d - b * c != 1:
        a, b, c, d = 1, b, 0, 1
    return UnimodularMatrix(a, b, c, d)


def close(p: TangentPoint, q: TangentPoint, tol=1e-10):
    dth = abs((p.theta - q.theta + math.pi) % (2 * math.pi) - math.pi)
    return abs(p.x - q.x) < tol * max(1, abs(p.x)) and abs(p.y - q.y) < tol * p.y and dth < tol


def test_canonical_sign_and_renormalisation():
    m = UnimodularMatrix(-2.0, -1.0, -1.0, -1.0)
    assert (m.a, m.b, m.c, m.d) == (2.0, 1.0, 1.0, 1.0)
    m = UnimodularMatrix(0.0, -3.0, 3.0, 0.0)  # det 9, first nonzero entry is b
    assert m.b > 0 and abs(m.det - 1) < 1e-12
    assert UnimodularMatrix(0.0, 1.0, -1.0, 0.0).isclose(UnimodularMatrix(0.0, -1.0, 1.0, 0.0))


def test_bad_determinant_rejected():
    with pytest.raises(ValueError):
        UnimodularMatrix(1.0, 1.0, 1.0, 1.0)


def test_compose_examples():
    I = UnimodularMatrix.identity()
    M = UnimodularMatrix(2.0, 3.0, 1.0, 2.0)
    assert compose(I, M).isclose(M, 1e-15)
    assert compose(geodesic_matrix(0.3), geodesic_matrix(-1.1)).isclose(geodesic_matrix(-0.8), 1e-12)
    s, t = 0.7, 2.5
    conj = compose(compose(geodesic_matrix(-s), horocycle_pos_matrix(t)), geodesic_matrix(s))
    assert conj.isclose(horocycle_pos_matrix(t * math.exp(-s)), 1e-12)


def test_moebius_examples():
    I = UnimodularMatrix.identity()
    assert moebius_apply(I, 0.3 + 2j) == pytest.approx(0.3 + 2j)
    assert moebius_apply(UnimodularMatrix(1, 1, 0, 1), 1j) == pytest.approx(1 + 1j)
    assert moebius_apply(UnimodularMatrix(0, -1, 1, 0), 1j) == pytest.approx(1j)
    with pytest.raises(ValueError):
        moebius_apply(I, 1.0 - 0.5j)


def test_tangent_apply_examples():
    p = TangentPoint(0.0, 1.0, math.pi / 2)
    assert close(tangent_apply(UnimodularMatrix.identity(), p), p)
    assert close(tangent_apply(UnimodularMatrix(1, 0.8, 0, 1), p), TangentPoint(0.8, 1.0, math.pi / 2))
    # derivative factor 1/(cz+d)^2 = 1/i^2 = -1 turns "up" into "down"
    assert close(tangent_apply(UnimodularMatrix(0, -1, 1, 0), p), TangentPoint(0.0, 1.0, 1.5 * math.pi))


def test_phi_examples():
    assert close(phi(UnimodularMatrix.identity()), BASE_POINT)
    assert close(phi(geodesic_matrix(1.3)), TangentPoint(0.0, math.exp(1.3), math.pi / 2))
    q = phi(horocycle_neg_matrix(1.0))
    assert close(q, TangentPoint(0.5, 0.5, 0.0))


def test_flow_examples():
    p = TangentPoint(0.0, 1.0, math.pi / 2)
    for kind in FlowKind:
        assert close(flow(p, kind, 0.0), p)
    assert close(flow(p, FlowKind.GEODESIC, -0.4), TangentPoint(0.0, math.exp(-0.4), math.pi / 2))
    assert close(flow(p, FlowKind.HOROCYCLE_POS, 3.0), TangentPoint(3.0, 1.0, math.pi / 2))


def test_dist_examples():
    p = TangentPoint(0.0, 1.0, math.pi / 2)
    assert dist(p, p) == 0.0
    assert dist(p, TangentPoint(0.0, math.e, math.pi / 2)) == pytest.approx(1.0, abs=1e-14)
    assert dist(TangentPoint(0.0, 1.0, 0.0), p) == pytest.approx(math.pi / 2)


@settings(max_examples=200, deadline=None)
@given(small_int_matrices(), small_int_matrices(), small_int_matrices())
def test_associativity(m1, m2, m3):
    lhs = compose(compose(m1, m2), m3)
    rhs = compose(m1, compose(m2, m3))
    assert lhs.isclose(rhs, 1e-12 * max(1.0, lhs.max_abs_entry()))
    assert abs(lhs.det - 1) < 1e-12


@settings(max_examples=200, deadline=None)
@given(points, st.sampled_from(list(FlowKind)), reals, reals)
def test_flow_group_law(p, kind, s, t):
    assert close(flow(flow(p, kind, s), kind, t), flow(p, kind, s + t), 1e-9)


@settings(max_examples=200, deadline=None)
@given(matrices(), matrices())
def test_phi_equivariance(g, a):
    assert close(phi(compose(g, a)), tangent_apply(g, phi(a)), 1e-9)


@settings(max_examples=200, deadline=None)
@given(points)
def test_phi_round_trip(p):
    assert close(phi(phi_inv(p)), p)


@settings(max_examples=200, deadline=None)
@given(matrices(), points, points)
def test_dist_left_invariant(g, p, q):
    d = dist(p, q)
    assert abs(dist(tangent_apply(g, p), tangent_apply(g, q)) - d) < 1e-8 * max(1.0, d)
    assert dist(q, p) == pytest.approx(d, abs=1e-12)


def test_array_kernels_match_scalars():
    rng = np.random.default_rng(5)
    pts = [TangentPoint(rng.uniform(-2, 2), math.exp(rng.uniform(-1, 1)), rng.uniform(0, 6)) for _ in range(50)]
    mats = [phi_inv(p) for p in pts]
    x, y, th = phi_arrays(*(np.array([getattr(m, k) for m in mats]) for k in "abcd"))
    for p, xi, yi, ti in zip(pts, x, y, th):
        assert close(p, TangentPoint(xi, yi, ti))
    d = dist_arrays(x[:-1], y[:-1], th[:-1], x[1:], y[1:], th[1:])
    assert np.allclose(d, [dist(p, q) for p, q in zip(pts[:-1], pts[1:])], atol=1e-12)
