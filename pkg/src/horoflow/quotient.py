"""Fundamental domains and reduction for PSL(2,Z) and its level-2 congruence subgroup.

Fundamental domains:

* ``MODULAR``: ``|Re z| <= 1/2`` and ``|z| >= 1``.
* ``GAMMA2``: ``|Re z| <= 1`` and ``|z -+ 1/2| >= 1/2``, an ideal quadrilateral
  with vertices ``-1, 0, 1, oo``.  Its sides are paired by ``z -> z + 2`` and
  ``z -> z / (2z + 1)``; the cusp classes are ``oo``, ``0`` and ``+-1``, all of
  width 2 (conjugate to ``z -> z + 2`` by an element of PSL(2,Z)).

A :class:`ReducedPoint` carries the reduced tangent vector together with the
deck transformation that maps it back to the original input.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonTermination
from .psl2 import (
    TWO_PI,
    TangentPoint,
    UnimodularMatrix,
    compose,
    dist_arrays,
    tangent_apply,
    tangent_apply_arrays,
)

BOUNDARY_TOL = 1e-9
STEP_BUDGET = 10_000
# loop guards: only act on points strictly outside by this margin so that
# boundary points do not ping-pong between identified sides
_EDGE = 1e-12


class FuchsianGroup(enum.Enum):
    MODULAR = "modular"
    GAMMA2 = "gamma2"

    @classmethod
    def parse(cls, value) -> FuchsianGroup:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown group {value!r}; expected 'modular' or 'gamma2'") from None


@dataclass(frozen=True)
class ReducedPoint:
    point: TangentPoint
    deck: UnimodularMatrix

    def unreduced(self) -> TangentPoint:
        return tangent_apply(self.deck, self.point)


def generators(group: FuchsianGroup) -> tuple[UnimodularMatrix, ...]:
    if group is FuchsianGroup.MODULAR:
        return (UnimodularMatrix(1, 1, 0, 1), UnimodularMatrix(0, -1, 1, 0))
    return (UnimodularMatrix(1, 2, 0, 1), UnimodularMatrix(1, 0, 2, 1))


@lru_cache(maxsize=None)
def translate_set(group: FuchsianGroup) -> tuple[UnimodularMatrix, ...]:
    """Identity, generators, their inverses and all products of two of those."""
    letters = []
    for g in generators(group):
        letters.extend([g, g.inverse()])
    words = [UnimodularMatrix.identity(), *letters]
    words.extend(compose(u, v) for u in letters for v in letters)
    out: list[UnimodularMatrix] = []
    for w in words:
        if not any(w.isclose(o, 1e-12) for o in out):
            out.append(w)
    return tuple(out)


def covolume(group: FuchsianGroup) -> float:
    """Hyperbolic area of the quotient surface."""
    return 2.0 * math.pi if group is FuchsianGroup.GAMMA2 else math.pi / 3.0


def bundle_volume(group: FuchsianGroup) -> float:
    """Total ``dx dy dtheta / y^2`` mass of the unit tangent bundle of the quotient."""
    return covolume(group) * TWO_PI


def cusp_region_area(group: FuchsianGroup, rho: float) -> float:
    """Area of the part of the surface bounded by cusp horocycles of length ``rho``.

    The lifted region is the same for both groups (the horodisc ``Im z > 2/rho``
    and its PSL(2,Z) images, discs of radius ``rho/(4q^2)`` at ``p/q``), so the
    modular surface sees one sixth of the level-2 area.
    """
    if not 0.0 < rho <= 2.0:
        raise ValueError(f"rho must lie in (0, 2], got {rho!r}")
    return 3.0 * rho if group is FuchsianGroup.GAMMA2 else rho / 2.0


def in_fundamental_domain(z: complex, group: FuchsianGroup, tol: float = BOUNDARY_TOL) -> bool:
    z = complex(z)
    if not z.imag > 0.0:
        raise ValueError(f"point {z!r} is not in the upper half-plane")
    return bool(in_fundamental_domain_arrays(np.array([z.real]), np.array([z.imag]), group, tol)[0])


def in_fundamental_domain_arrays(x, y, group: FuchsianGroup, tol: float = BOUNDARY_TOL):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if group is FuchsianGroup.MODULAR:
        return (np.abs(x) <= 0.5 + tol) & (x * x + y * y >= 1.0 - tol)
    r2 = 0.25 - tol
    return (
        (np.abs(x) <= 1.0 + tol)
        & ((x - 0.5) ** 2 + y * y >= r2)
        & ((x + 0.5) ** 2 + y * y >= r2)
    )


# --- reduction --------------------------------------------------------------


# Representatives of SL(2,Z) modulo its level-2 subgroup, keyed by entries mod 2.
# Each maps the modular domain onto a region touching the Gamma(2) domain.
_COSET_REPS = {
    (1, 0, 0, 1): (1.0, 0.0, 0.0, 1.0),
    (1, 1, 0, 1): (1.0, 1.0, 0.0, 1.0),
    (0, 1, 1, 0): (0.0, -1.0, 1.0, 0.0),
    (1, 1, 1, 0): (1.0, -1.0, 1.0, 0.0),
    (0, 1, 1, 1): (0.0, -1.0, 1.0, 1.0),
    (1, 0, 1, 1): (1.0, 0.0, 1.0, 1.0),
}
_COSET_TABLE = np.zeros((16, 4))
for _key, _rep in _COSET_REPS.items():
    _COSET_TABLE[_key[0] * 8 + _key[1] * 4 + _key[2] * 2 + _key[3]] = _rep


def _loop_scalar(x, y, theta, group, budget, A=1.0, B=0.0, C=0.0, D=1.0):
    modular = group is FuchsianGroup.MODULAR
    half_width = 0.5 if modular else 1.0
    period = 1.0 if modular else 2.0
    for _ in range(budget):
        if abs(x) > half_width + _EDGE:
            n = round(x / period)
            x -= n * period
            A, B = A - n * period * C, B - n * period * D
        if modular:
            n2 = x * x + y * y
            if n2 < 1.0 - _EDGE:
                theta -= 2.0 * math.atan2(y, x)
                x, y = -x / n2, y / n2
                A, B, C, D = -C, -D, A, B
                continue
        else:
            if (x - 0.5) ** 2 + y * y < 0.25 - _EDGE:
                sign = -2.0
            elif (x + 0.5) ** 2 + y * y < 0.25 - _EDGE:
                sign = 2.0
            else:
                sign = 0.0
            if sign:
                dre, dim = sign * x + 1.0, sign * y
                n2 = dre * dre + dim * dim
                # z / (sign z + 1)
                x, y = (x * dre + y * dim) / n2, y / n2
                theta -= 2.0 * math.atan2(dim, dre)
                A, B, C, D = A, B, C + sign * A, D + sign * B
                continue
        return x, y, theta, (A, B, C, D)
    raise NonTermination(f"reduction exceeded {budget} steps")


def _settled(x, y, group):
    """True where neither loop would move the point (so reduction is exactly the identity)."""
    if group is FuchsianGroup.MODULAR:
        return (np.abs(x) <= 0.5 + _EDGE) & (x * x + y * y >= 1.0 - _EDGE)
    return (
        (np.abs(x) <= 1.0 + _EDGE)
        & ((x - 0.5) ** 2 + y * y >= 0.25 - _EDGE)
        & ((x + 0.5) ** 2 + y * y >= 0.25 - _EDGE)
    )


def _reduce_scalar(x: float, y: float, theta: float, group: FuchsianGroup, budget: int):
    """Pure-float reduction; returns reduced coords and the applied matrix.

    Gamma(2) goes through PSL(2,Z) first: the modular loop removes large
    parabolic offsets in one translation per cusp visit, whereas the
    Gamma(2) loop would clear an offset near the cusps 0 and +-1 one
    generator at a time.  A coset representative matching the modular deck
    modulo 2 then lands the point next to the Gamma(2) domain.
    """
    if _settled(x, y, group):
        return x, y, theta % TWO_PI, (1.0, 0.0, 0.0, 1.0)
    x, y, theta, (A, B, C, D) = _loop_scalar(x, y, theta, FuchsianGroup.MODULAR, budget)
    if group is FuchsianGroup.GAMMA2:
        key = tuple(int(round(v)) % 2 for v in (D, -B, -C, A))
        ra, rb, rc, rd = _COSET_REPS[key]
        z = complex(x, y)
        den = rc * z + rd
        w = (ra * z + rb) / den
        theta -= 2.0 * math.atan2(den.imag, den.real)
        x, y = w.real, y / abs(den) ** 2
        A, B, C, D = ra * A + rb * C, ra * B + rb * D, rc * A + rd * C, rc * B + rd * D
        x, y, theta, (A, B, C, D) = _loop_scalar(x, y, theta, group, budget, A, B, C, D)
    return x, y, theta % TWO_PI, (A, B, C, D)


def reduce(p: TangentPoint, group: FuchsianGroup, budget: int = STEP_BUDGET) -> ReducedPoint:
    """Move ``p`` into the fundamental domain of ``group``.

    The returned deck satisfies ``tangent_apply(deck, reduced.point) == p``.

    Raises
    ------
    NonTermination
        If the translation/inversion loop exceeds ``budget`` steps.
    """
    x, y, theta, (A, B, C, D) = _reduce_scalar(p.x, p.y, p.theta, group, budget)
    deck = UnimodularMatrix(D, -B, -C, A)
    return ReducedPoint(TangentPoint(x, y, theta), deck)


def _loop_arrays(x, y, th, group, budget, A, B, C, D):
    modular = group is FuchsianGroup.MODULAR
    half_width = 0.5 if modular else 1.0
    period = 1.0 if modular else 2.0
    idx = np.arange(x.size)
    for _ in range(budget):
        if idx.size == 0:
            break
        xs, ys = x[idx], y[idx]
        far = np.abs(xs) > half_width + _EDGE
        if far.any():
            k = np.round(xs[far] / period)
            j = idx[far]
            xs[far] -= k * period
            A[j] -= k * period * C[j]
            B[j] -= k * period * D[j]
        if modular:
            n2 = xs * xs + ys * ys
            inv = n2 < 1.0 - _EDGE
            j = idx[inv]
            xi, yi, ni = xs[inv], ys[inv], n2[inv]
            th[j] -= 2.0 * np.arctan2(yi, xi)
            xs[inv] = -xi / ni
            ys[inv] = yi / ni
            a_old, b_old = A[j].copy(), B[j].copy()
            A[j], B[j] = -C[j], -D[j]
            C[j], D[j] = a_old, b_old
            x[idx], y[idx] = xs, ys
            idx = j
        else:
            right = (xs - 0.5) ** 2 + ys * ys < 0.25 - _EDGE
            left = (xs + 0.5) ** 2 + ys * ys < 0.25 - _EDGE
            act = right | left
            sign = np.where(right, -2.0, 2.0)[act]
            j = idx[act]
            xi, yi = xs[act], ys[act]
            dre, dim = sign * xi + 1.0, sign * yi
            n2 = dre * dre + dim * dim
            xs[act] = (xi * dre + yi * dim) / n2
            ys[act] = yi / n2
            th[j] -= 2.0 * np.arctan2(dim, dre)
            C[j] += sign * A[j]
            D[j] += sign * B[j]
            x[idx], y[idx] = xs, ys
            idx = j
    else:
        if idx.size:
            raise NonTermination(f"reduction exceeded {budget} steps for {idx.size} points")


def reduce_arrays(x, y, theta, group: FuchsianGroup, budget: int = STEP_BUDGET, with_deck: bool = False):
    """Vectorised :func:`reduce`.

    Returns ``(x, y, theta)`` and, when ``with_deck`` is set, the deck entries
    ``(a, b, c, d)`` as float arrays holding exact integers.
    """
    x = np.array(x, dtype=float, copy=True).ravel()
    y = np.array(y, dtype=float, copy=True).ravel()
    th = np.array(theta, dtype=float, copy=True).ravel()
    n = x.size
    keep = _settled(x, y, group)
    x0, y0, th0 = x[keep], y[keep], th[keep]
    A, B, C, D = np.ones(n), np.zeros(n), np.zeros(n), np.ones(n)
    _loop_arrays(x, y, th, FuchsianGroup.MODULAR, budget, A, B, C, D)
    if group is FuchsianGroup.GAMMA2:
        par = [np.mod(np.rint(v), 2.0).astype(np.int64) for v in (D, -B, -C, A)]
        rep = _COSET_TABLE[par[0] * 8 + par[1] * 4 + par[2] * 2 + par[3]]
        ra, rb, rc, rd = rep[:, 0], rep[:, 1], rep[:, 2], rep[:, 3]
        den_re, den_im = rc * x + rd, rc * y
        n2 = den_re * den_re + den_im * den_im
        num_re, num_im = ra * x + rb, ra * y
        x = (num_re * den_re + num_im * den_im) / n2
        y = y / n2
        th -= 2.0 * np.arctan2(den_im, den_re)
        A, B, C, D = ra * A + rb * C, ra * B + rb * D, rc * A + rd * C, rc * B + rd * D
        _loop_arrays(x, y, th, group, budget, A, B, C, D)
    if keep.any():
        x[keep], y[keep], th[keep] = x0, y0, th0
        A[keep], B[keep], C[keep], D[keep] = 1.0, 0.0, 0.0, 1.0
    th = np.mod(th, TWO_PI)
    if with_deck:
        return x, y, th, (D, -B, -C, A)
    return x, y, th


def cusp_levels(x, y, budget: int = STEP_BUDGET):
    """Deepest cusp data for base points ``x + iy`` of the upper half-plane.

    Reduces each point by PSL(2,Z) to ``w`` with ``z = g w``.  Returns arrays
    ``(p, q, level)`` with ``p/q = g(oo)`` in lowest terms (``q = 0`` encodes
    the cusp at infinity) and ``level = 2 / Im w``: the point lies in the
    level-``rho`` disc at ``p/q`` exactly when ``level < rho`` (for ``rho <= 2``).
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape
    xr, yr, _, (a, b, c, d) = reduce_arrays(
        x.ravel(), np.asarray(y, dtype=float).ravel(), np.zeros(x.size), FuchsianGroup.MODULAR, budget, with_deck=True
    )
    p, q = a.copy(), c.copy()
    neg = (q < 0) | ((q == 0) & (p < 0))
    p[neg], q[neg] = -p[neg], -q[neg]
    return p.reshape(shape), q.reshape(shape), (2.0 / yr).reshape(shape)


# --- distances ---------------------------------------------------------------


def quotient_dist(p, q, group: FuchsianGroup) -> float:
    """Minimum of ``dist(p, g.q)`` over :func:`translate_set`; an upper bound on the quotient distance."""
    pp = p.point if isinstance(p, ReducedPoint) else p
    qq = q.point if isinstance(q, ReducedPoint) else q
    return float(quotient_dist_arrays(pp.x, pp.y, pp.theta, qq.x, qq.y, qq.theta, group))


def quotient_dist_arrays(x1, y1, t1, x2, y2, t2, group: FuchsianGroup):
    best = None
    for g in translate_set(group):
        gx, gy, gt = tangent_apply_arrays(g, x2, y2, t2)
        d = dist_arrays(x1, y1, t1, gx, gy, gt)
        best = d if best is None else np.minimum(best, d)
    return best


# --- Monte Carlo areas ---------------------------------------------------------


def _sample_inverse_square(rng: np.random.Generator, n: int, lo: float, hi: float) -> np.ndarray:
    """Samples with density proportional to ``1/y^2`` on ``[lo, hi]``."""
    u = rng.random(n)
    return 1.0 / (1.0 / lo - u * (1.0 / lo - 1.0 / hi))


def gamma2_lower_tail_area(y_lo: float) -> float:
    """Area of the Gamma(2) domain below height ``y_lo <= 1/2`` (the cusps at 0 and +-1)."""
    u = math.asin(2.0 * y_lo)
    return 4.0 * (u - math.tan(u / 2.0))


def _domain_box(group: FuchsianGroup):
    if group is FuchsianGroup.MODULAR:
        return 0.5, math.sqrt(3.0) / 2.0
    return 1.0, None


def mc_domain_area(group: FuchsianGroup, n_samples: int, seed: int, y_lo: float = 0.25, y_hi: float = 4.0):
    """Monte Carlo hyperbolic area of the fundamental domain.

    Samples ``dx dy / y^2`` on a box below ``y_hi`` and adds the analytically
    known strips above ``y_hi`` (and, for Gamma(2), below ``y_lo``).
    Returns ``(estimate, stderr)``.
    """
    rng = np.random.default_rng(seed)
    half_width, y_min = _domain_box(group)
    lo = y_min if y_min is not None else y_lo
    xs = rng.uniform(-half_width, half_width, n_samples)
    ys = _sample_inverse_square(rng, n_samples, lo, y_hi)
    inside = in_fundamental_domain_arrays(xs, ys, group, tol=0.0).astype(float)
    box = 2.0 * half_width * (1.0 / lo - 1.0 / y_hi)
    est = box * inside.mean() + 2.0 * half_width / y_hi
    if y_min is None:
        est += gamma2_lower_tail_area(lo)
    return est, box * inside.std(ddof=1) / math.sqrt(n_samples)


def mc_cusp_area(group: FuchsianGroup, rho: float, n_samples: int, seed: int):
    """Monte Carlo area of the cusp region ``X - X^rho``; returns ``(estimate, stderr)``."""
    if not 0.0 < rho <= 2.0:
        raise ValueError(f"rho must lie in (0, 2], got {rho!r}")
    rng = np.random.default_rng(seed)
    half_width, y_min = _domain_box(group)
    lo = y_min if y_min is not None else rho / 4.0
    hi = 4.0 / rho
    xs = rng.uniform(-half_width, half_width, n_samples)
    ys = _sample_inverse_square(rng, n_samples, lo, hi)
    inside = in_fundamental_domain_arrays(xs, ys, group, tol=0.0)
    _, _, level = cusp_levels(xs, ys)
    hit = (inside & (level < rho)).astype(float)
    box = 2.0 * half_width * (1.0 / lo - 1.0 / hi)
    # strip above hi lies in the cusp at infinity; for Gamma(2) the strip below
    # rho/4 lies inside the discs at 0 and +-1
    est = box * hit.mean() + 2.0 * half_width / hi
    if y_min is None:
        est += gamma2_lower_tail_area(lo)
    return est, box * hit.std(ddof=1) / math.sqrt(n_samples)
