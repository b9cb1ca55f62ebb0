"""Randomised residual checks of the algebraic identities the engine relies on."""

from __future__ import annotations

import math

import numpy as np

from .flow_geometry import alpha, alpha_prime, solve_commutation
from .psl2 import (
    FlowKind,
    TangentPoint,
    UnimodularMatrix,
    compose,
    dist,
    flow,
    geodesic_matrix,
    horocycle_pos_matrix,
    phi,
    tangent_apply,
)


def random_matrix(rng: np.random.Generator, scale: float = 10.0) -> UnimodularMatrix:
    """Entries uniform in ``[-scale, scale]``, redrawn until the determinant is safely positive."""
    while True:
        a, b, c, d = rng.uniform(-scale, scale, 4)
        if a * d - b * c > 1e-3:
            return UnimodularMatrix(a, b, c, d)


def random_point(rng: np.random.Generator) -> TangentPoint:
    return TangentPoint(rng.uniform(-3, 3), math.exp(rng.uniform(-2, 2)), rng.uniform(0, 2 * math.pi))


def _entry_gap(m1: UnimodularMatrix, m2: UnimodularMatrix) -> float:
    p = np.array([m1.a, m1.b, m1.c, m1.d])
    q = np.array([m2.a, m2.b, m2.c, m2.d])
    return float(min(np.max(np.abs(p - q)), np.max(np.abs(p + q))) / max(1.0, np.max(np.abs(p))))


def _point_gap(p: TangentPoint, q: TangentPoint) -> float:
    dth = abs((p.theta - q.theta + math.pi) % (2 * math.pi) - math.pi)
    return max(abs(p.x - q.x) / max(1.0, abs(p.x)), abs(p.y - q.y) / p.y, dth)


def identity_residuals(n: int = 10_000, seed: int = 0) -> dict[str, float]:
    """Largest residual of each identity over ``n`` random samples (matrix gaps relative to the entry size)."""
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(
        [
            "associativity",
            "geodesic_group_law",
            "flow_additivity",
            "conjugation",
            "equivariance",
            "dist_left_invariance",
            "alpha_vs_commutation",
            "alpha_prime_vs_differences",
        ],
        0.0,
    )
    kinds = list(FlowKind)
    for i in range(n):
        m1, m2, m3 = random_matrix(rng), random_matrix(rng), random_matrix(rng)
        worst["associativity"] = max(
            worst["associativity"], _entry_gap(compose(compose(m1, m2), m3), compose(m1, compose(m2, m3)))
        )
        s, t = rng.uniform(-3, 3, 2)
        worst["geodesic_group_law"] = max(
            worst["geodesic_group_law"], _entry_gap(compose(geodesic_matrix(s), geodesic_matrix(t)), geodesic_matrix(s + t))
        )
        conj = compose(compose(geodesic_matrix(-s), horocycle_pos_matrix(t)), geodesic_matrix(s))
        worst["conjugation"] = max(worst["conjugation"], _entry_gap(conj, horocycle_pos_matrix(t * math.exp(-s))))
        p = random_point(rng)
        k = kinds[i % 3]
        worst["flow_additivity"] = max(
            worst["flow_additivity"], _point_gap(flow(flow(p, k, s), k, t), flow(p, k, s + t))
        )
        g = random_matrix(rng, 3.0)
        worst["equivariance"] = max(worst["equivariance"], _point_gap(phi(compose(g, m1)), tangent_apply(g, phi(m1))))
        q = random_point(rng)
        d0 = dist(p, q)
        worst["dist_left_invariance"] = max(
            worst["dist_left_invariance"], abs(dist(tangent_apply(g, p), tangent_apply(g, q)) - d0) / max(1.0, d0)
        )
        # shadowing reparametrisation on |r s| <= 3/4, |t| <= 2
        ss = rng.uniform(-3, 3)
        rr = rng.uniform(-0.75, 0.75) / max(abs(ss), 1.0)
        tt = rng.uniform(-2, 2)
        al = solve_commutation(rr, tt, ss)[0]
        worst["alpha_vs_commutation"] = max(worst["alpha_vs_commutation"], abs(al - alpha(rr, tt, ss)))
        hh = 1e-5
        fd = (alpha(rr, tt, ss + hh) - alpha(rr, tt, ss - hh)) / (2 * hh)
        ap = alpha_prime(rr, tt, ss)
        worst["alpha_prime_vs_differences"] = max(worst["alpha_prime_vs_differences"], abs(fd - ap) / abs(ap))
    return worst
