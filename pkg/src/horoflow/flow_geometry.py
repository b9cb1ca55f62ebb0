"""Shadowing geometry: the alpha reparametrisation, rectangles and boxes.

Write ``y = x u-(r) g(t)`` for a point on the weak-unstable leaf through
``x``.  Flowing ``x`` along the positive horocycle for time ``s`` and ``y``
for time ``alpha(r, t, s)`` keeps the two orbits on a common leaf, and the
matrix identity

    U-(r) G(t) U+(alpha) = U+(s) U-(rho) G(tau)

pins down ``alpha`` explicitly.  :func:`solve_commutation` solves that
identity numerically without using the closed form, which makes it an
independent check of :func:`alpha`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import DenominatorVanishes, NoSolution
from .psl2 import (
    TangentPoint,
    UnimodularMatrix,
    compose,
    geodesic_matrix,
    horocycle_neg_matrix,
    hyperbolic_distance_arrays,
    phi,
    phi_arrays,
    phi_inv,
)
from .quotient import FuchsianGroup, quotient_dist_arrays, reduce_arrays

DENOM_TOL = 1e-9


def _check_denominator(r: float, s: float, exc=DenominatorVanishes) -> float:
    den = 1.0 - r * s
    if den <= DENOM_TOL:
        raise exc(f"1 - r*s = {den:.3g}: the horocycle through x never meets the leaf of y")
    return den


def alpha(r: float, t: float, s: float) -> float:
    """Time along the horocycle of ``y = x u-(r) g(t)`` matching time ``s`` along that of ``x``."""
    den = _check_denominator(r, s)
    return s / (math.exp(t) * den)


def alpha_prime(r: float, t: float, s: float) -> float:
    """Derivative of :func:`alpha` in ``s``."""
    den = _check_denominator(r, s)
    return 1.0 / (math.exp(t) * den * den)


def _commutation_residual(r, t, s, v):
    al, rho, tau = v
    et, ei = math.exp(t / 2), math.exp(tau / 2)
    lhs = np.array([et, al * et, r * et, r * al * et + 1.0 / et])
    rhs = np.array([(1.0 + s * rho) * ei, s / ei, rho * ei, 1.0 / ei])
    return lhs - rhs


def _commutation_jacobian(r, t, s, v):
    al, rho, tau = v
    et, ei = math.exp(t / 2), math.exp(tau / 2)
    return np.array(
        [
            [0.0, -s * ei, -0.5 * (1.0 + s * rho) * ei],
            [et, 0.0, 0.5 * s / ei],
            [0.0, -ei, -0.5 * rho * ei],
            [r * et, 0.0, 0.5 / ei],
        ]
    )


def solve_commutation(r: float, t: float, s: float):
    """Solve ``U-(r) G(t) U+(alpha) = U+(s) U-(rho) G(tau)`` for ``(alpha, rho, tau)``.

    Levenberg-Marquardt (damped Gauss-Newton) on the four matrix entries
    with the analytic Jacobian, started from ``(s, r, t)``.  The closed form
    for ``alpha`` is never consulted.

    Raises
    ------
    NoSolution
        If ``1 - r*s`` is not safely positive, or the solver leaves a matrix
        residual above ``1e-10``.
    """
    _check_denominator(r, s, NoSolution)
    sol = least_squares(
        lambda v: _commutation_residual(r, t, s, v),
        np.array([s, r, t], dtype=float),
        jac=lambda v: _commutation_jacobian(r, t, s, v),
        method="lm",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )
    worst = float(np.max(np.abs(sol.fun)))
    if not worst < 1e-10:
        raise NoSolution(f"commutation residual stuck at {worst:.3g} for r={r}, t={t}, s={s}")
    return float(sol.x[0]), float(sol.x[1]), float(sol.x[2])


def commutation_residual(r: float, t: float, s: float, solution) -> float:
    return float(np.max(np.abs(_commutation_residual(r, t, s, np.asarray(solution, dtype=float)))))


# --- rectangles ---------------------------------------------------------------


@dataclass(frozen=True)
class RectangleSpec:
    """``S_x(a, b)``: points ``x u-(r) g(s)`` with ``|r| <= a`` and ``|s| <= b``."""

    base: TangentPoint
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("rectangle half-widths must be positive")

    def point(self, r: float, s: float) -> TangentPoint:
        return phi(compose(compose(phi_inv(self.base), horocycle_neg_matrix(r)), geodesic_matrix(s)))


@dataclass(frozen=True)
class BoxSpec:
    """``W_x(a, b, c)``: the rectangle thickened by positive-horocycle time ``c``."""

    rectangle: RectangleSpec
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("box extent c must be positive")


def rectangle_coordinates(base: TangentPoint, p: TangentPoint) -> tuple[float, float]:
    """``(r, s)`` with ``p = base u-(r) g(s)``; ``p`` must lie on the weak-unstable leaf of ``base``."""
    m = compose(phi_inv(base).inverse(), phi_inv(p))
    # m = [[e^{s/2}, 0], [r e^{s/2}, e^{-s/2}]]
    return m.c / m.a, 2.0 * math.log(m.a)


def rectangle_scaling_check(spec: RectangleSpec, s: float, n_samples: int, seed: int = 0) -> float:
    """Max deviation of the rectangle coordinates of ``S_x(a,b) g(s)`` from ``(e^s r, s_i)``.

    Points are taken uniformly in the rectangle, with its four corners always
    included, flowed by ``g(s)`` and re-expressed relative to ``x g(s)``.
    """
    rng = np.random.default_rng(seed)
    rs = rng.uniform(-spec.a, spec.a, n_samples)
    ss = rng.uniform(-spec.b, spec.b, n_samples)
    rs = np.concatenate([[spec.a, spec.a, -spec.a, -spec.a], rs])
    ss = np.concatenate([[spec.b, -spec.b, spec.b, -spec.b], ss])
    new_base = phi(compose(phi_inv(spec.base), geodesic_matrix(s)))
    worst = 0.0
    for r_i, s_i in zip(rs, ss):
        moved = phi(compose(phi_inv(spec.point(float(r_i), float(s_i))), geodesic_matrix(s)))
        r2, s2 = rectangle_coordinates(new_base, moved)
        worst = max(worst, abs(r2 - math.exp(s) * r_i), abs(s2 - s_i))
    return worst


# --- shadowing -----------------------------------------------------------------


def _orbit_points(m: UnimodularMatrix, times: np.ndarray):
    # phi(m U+(t)) entrywise: [[a, a t + b], [c, c t + d]]
    return phi_arrays(m.a, m.a * times + m.b, m.c, m.c * times + m.d)


def shadowing_sup_distance(
    x: TangentPoint,
    delta: float,
    t: float,
    r: float,
    u: float,
    n_samples: int = 1000,
    group: FuchsianGroup = FuchsianGroup.GAMMA2,
) -> float:
    """Largest quotient distance between ``x u+(s)`` and ``y u+(alpha(r,u,s))``, ``s`` in ``[0, t]``.

    ``y = x u-(r) g(u)``.  Dividing the result by ``delta`` gives an
    empirical shadowing constant.
    """
    if not 0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    if abs(r) > delta / t * (1 + 1e-12) or abs(u) > delta * (1 + 1e-12):
        raise ValueError("need |r| <= delta/t and |u| <= delta")
    s_grid = np.linspace(0.0, t, n_samples)
    den = 1.0 - r * s_grid
    if np.min(den) <= DENOM_TOL:
        raise DenominatorVanishes("1 - r*s vanishes on the sampling grid")
    al = s_grid / (math.exp(u) * den)
    A = phi_inv(x)
    B = compose(compose(A, horocycle_neg_matrix(r)), geodesic_matrix(u))
    p = reduce_arrays(*_orbit_points(A, s_grid), group)
    q = reduce_arrays(*_orbit_points(B, al), group)
    d = quotient_dist_arrays(*p, *q, group)
    return float(np.max(d))


def horocycle_segment_length(x: TangentPoint, t: float, L: float, n: int = 2000) -> float:
    """Hyperbolic length of the base-point curve ``{x u+(s) g(t) : 0 <= s <= L}``.

    Geodesic chords over ``n`` and ``2n`` subdivisions, Richardson-extrapolated.
    """
    m = compose(phi_inv(x), UnimodularMatrix.identity())

    def chords(k):
        s = np.linspace(0.0, L, k + 1)
        et, emt = math.exp(t / 2), math.exp(-t / 2)
        # x U+(s) G(t) = [[a e, (a s + b) / e], [c e, (c s + d) / e]]
        px, py, _ = phi_arrays(m.a * et, (m.a * s + m.b) * emt, m.c * et, (m.c * s + m.d) * emt)
        return float(np.sum(hyperbolic_distance_arrays(px[:-1], py[:-1], px[1:], py[1:])))

    coarse, fine = chords(n), chords(2 * n)
    return fine + (fine - coarse) / 3.0
