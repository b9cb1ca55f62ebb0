"""PSL(2,R) acting on the unit tangent bundle of the upper half-plane.

A unit tangent vector at ``z = x + iy`` is stored as ``(x, y, theta)`` where
the Euclidean vector is ``xi = y * exp(i*theta)``.  The base point
``(i, theta=pi/2)`` corresponds to the identity matrix, and the geodesic,
positive horocycle and negative horocycle flows are right multiplication by
``G^t``, ``U+^t`` and ``U-^t`` respectively.

Scalar functions work on the small immutable value types below; the ``*_arrays``
helpers are their vectorised counterparts used by the orbit integrators.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
DET_TOL = 1e-12


class FlowKind(enum.Enum):
    GEODESIC = "geodesic"
    HOROCYCLE_POS = "horocycle+"
    HOROCYCLE_NEG = "horocycle-"


@dataclass(frozen=True)
class UnimodularMatrix:
    """Determinant-one 2x2 real matrix, canonical representative of +/-M.

    Construction renormalises by ``sqrt(det)`` and flips the overall sign so
    the first nonzero entry in the order ``a, b, c, d`` is positive.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        a, b, c, d = (float(v) for v in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if not det > 0.0 or not math.isfinite(det):
            raise ValueError(f"matrix has non-positive determinant {det!r}")
        if abs(det - 1.0) > DET_TOL:
            s = math.sqrt(det)
            a, b, c, d = a / s, b / s, c / s, d / s
        for v in (a, b, c, d):
            if v != 0.0:
                if v < 0.0:
                    a, b, c, d = -a, -b, -c, -d
                break
        a, b, c, d = a + 0.0, b + 0.0, c + 0.0, d + 0.0  # no negative zeros
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def identity(cls) -> UnimodularMatrix:
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, m) -> UnimodularMatrix:
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def inverse(self) -> UnimodularMatrix:
        return UnimodularMatrix(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: UnimodularMatrix) -> UnimodularMatrix:
        return compose(self, other)

    def max_abs_entry(self) -> float:
        return max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))

    def isclose(self, other: UnimodularMatrix, tol: float = 1e-10) -> bool:
        """Entrywise comparison modulo the overall sign."""
        p = np.array([self.a, self.b, self.c, self.d])
        q = np.array([other.a, other.b, other.c, other.d])
        return bool(np.max(np.abs(p - q)) <= tol or np.max(np.abs(p + q)) <= tol)


@dataclass(frozen=True)
class TangentPoint:
    """Unit tangent vector ``(x + iy, y*exp(i*theta))`` of the upper half-plane."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        if not self.y > 0.0:
            raise ValueError(f"tangent point needs y > 0, got {self.y!r}")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.theta)


BASE_POINT = TangentPoint(0.0, 1.0, math.pi / 2)


def geodesic_matrix(t: float) -> UnimodularMatrix:
    return UnimodularMatrix(math.exp(t / 2), 0.0, 0.0, math.exp(-t / 2))


def horocycle_pos_matrix(t: float) -> UnimodularMatrix:
    return UnimodularMatrix(1.0, t, 0.0, 1.0)


def horocycle_neg_matrix(t: float) -> UnimodularMatrix:
    return UnimodularMatrix(1.0, 0.0, t, 1.0)


def flow_matrix(kind: FlowKind, t: float) -> UnimodularMatrix:
    if kind is FlowKind.GEODESIC:
        return geodesic_matrix(t)
    if kind is FlowKind.HOROCYCLE_POS:
        return horocycle_pos_matrix(t)
    if kind is FlowKind.HOROCYCLE_NEG:
        return horocycle_neg_matrix(t)
    raise ValueError(f"unknown flow kind {kind!r}")


def compose(m1: UnimodularMatrix, m2: UnimodularMatrix) -> UnimodularMatrix:
    """Canonical representative of ``m1 @ m2``, renormalised to det 1."""
    return UnimodularMatrix(
        m1.a * m2.a + m1.b * m2.c,
        m1.a * m2.b + m1.b * m2.d,
        m1.c * m2.a + m1.d * m2.c,
        m1.c * m2.b + m1.d * m2.d,
    )


def moebius_apply(m: UnimodularMatrix, z: complex) -> complex:
    """``(az + b) / (cz + d)`` for ``Im z > 0``."""
    z = complex(z)
    if not z.imag > 0.0:
        raise ValueError(f"point {z!r} is not in the upper half-plane")
    return (m.a * z + m.b) / (m.c * z + m.d)


def tangent_apply(m: UnimodularMatrix, p: TangentPoint) -> TangentPoint:
    """Derivative action: base point by Moebius, direction rotated by ``-2 arg(cz+d)``."""
    z = p.z
    den = m.c * z + m.d
    w = (m.a * z + m.b) / den
    return TangentPoint(w.real, p.y / abs(den) ** 2, p.theta - 2.0 * math.atan2(den.imag, den.real))


def phi(m: UnimodularMatrix) -> TangentPoint:
    """Image of the base point ``(i, i)`` under ``m``."""
    x, y, theta = phi_arrays(m.a, m.b, m.c, m.d)
    return TangentPoint(float(x), float(y), float(theta))


def phi_inv(p: TangentPoint) -> UnimodularMatrix:
    """The unique element of PSL(2,R) carrying ``(i, i)`` to ``p``."""
    a, b, c, d = phi_inv_arrays(p.x, p.y, p.theta)
    return UnimodularMatrix(float(a), float(b), float(c), float(d))


def flow(p: TangentPoint, kind: FlowKind, t: float) -> TangentPoint:
    return phi(compose(phi_inv(p), flow_matrix(kind, t)))


def dist(p: TangentPoint, q: TangentPoint) -> float:
    """Product-type distance ``sqrt(d_hyp^2 + dtheta^2)`` on the unit tangent bundle.

    ``dtheta`` compares the two directions after parallel transport along the
    geodesic joining the base points, which makes the distance invariant under
    the left action of PSL(2,R).
    """
    return float(dist_arrays(p.x, p.y, p.theta, q.x, q.y, q.theta))


# --- vectorised kernels -----------------------------------------------------


def phi_arrays(a, b, c, d):
    """``(x, y, theta)`` arrays for matrices given entrywise."""
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    den_re, den_im = d, c  # c*i + d
    n2 = den_re * den_re + den_im * den_im
    # (a i + b)(d - c i) / |ci + d|^2
    x = (b * d + a * c) / n2
    y = 1.0 / n2
    theta = np.mod(math.pi / 2 - 2.0 * np.arctan2(den_im, den_re), TWO_PI)
    return x, y, theta


def phi_inv_arrays(x, y, theta):
    """Entries ``(a, b, c, d)`` of ``[[1,x],[0,1]] diag(sqrt y, 1/sqrt y) K(phi)``."""
    x, y, theta = (np.asarray(v, dtype=float) for v in (x, y, theta))
    half = 0.5 * (math.pi / 2 - theta)
    cs, sn = np.cos(half), np.sin(half)
    sy = np.sqrt(y)
    # diag(sy, 1/sy) @ [[cs, -sn], [sn, cs]] then left-translate by x
    a0, b0 = sy * cs, -sy * sn
    c0, d0 = sn / sy, cs / sy
    return a0 + x * c0, b0 + x * d0, c0, d0


def hyperbolic_distance_arrays(x1, y1, x2, y2):
    """``d_hyp`` in the upper half-plane, stable for nearby points."""
    dx = np.asarray(x1) - np.asarray(x2)
    dy = np.asarray(y1) - np.asarray(y2)
    return 2.0 * np.arcsinh(np.sqrt(dx * dx + dy * dy) / (2.0 * np.sqrt(np.asarray(y1) * np.asarray(y2))))


def transport_shift_arrays(x1, y1, x2, y2):
    """Change of the coordinate angle under parallel transport from z1 to z2."""
    z1 = np.asarray(x1) + 1j * np.asarray(y1)
    z2 = np.asarray(x2) + 1j * np.asarray(y2)
    return np.angle((z2 - np.conj(z1)) / (z1 - np.conj(z2)))


def dist_arrays(x1, y1, t1, x2, y2, t2):
    dh = hyperbolic_distance_arrays(x1, y1, x2, y2)
    shift = transport_shift_arrays(x1, y1, x2, y2)
    dth = np.asarray(t2) - np.asarray(t1) - shift
    dth = np.abs(np.mod(dth + math.pi, TWO_PI) - math.pi)
    return np.sqrt(dh * dh + dth * dth)


def tangent_apply_arrays(m: UnimodularMatrix, x, y, theta):
    z = np.asarray(x) + 1j * np.asarray(y)
    den = m.c * z + m.d
    w = (m.a * z + m.b) / den
    return w.real, np.asarray(y) / np.abs(den) ** 2, np.mod(np.asarray(theta) - 2.0 * np.angle(den), TWO_PI)
