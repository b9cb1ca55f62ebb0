"""Cusp excursions of explicit horocycles and the rational approximations they produce.

The lift of the cusp region ``X - X^rho`` to the upper half-plane is the
horodisc ``Im z > 2/rho`` together with the discs of radius ``rho/(4 q^2)``
tangent to the real axis at every reduced fraction ``p/q``.  Membership in
the disc at ``p/q`` is the branch-free inequality ``|q z - p|^2 < (rho/2) Im z``;
equivalently the *level* ``2 |q z - p|^2 / Im z`` is below ``rho``.  This
description is the same for PSL(2,Z) and for Gamma(2), because both groups
act transitively on the rationals with every cusp of width 2 after the
normalisation used here.

The horocycle tangent to the real axis at ``alpha`` with Euclidean diameter 2
is parametrised as

    z(T) = alpha - 2 T / (T^2 + 1) + 2 i / (T^2 + 1),

which is the base point of ``x0 u+(T)`` for the lift returned by
:func:`horocycle_lift`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy.optimize import bisect, minimize_scalar

from .errors import BoundViolated, NoSolution
from .psl2 import TangentPoint, UnimodularMatrix, phi_inv
from .quotient import FuchsianGroup, cusp_levels
from .targets import MP_DPS, RationalTarget, Target, alpha_value, linear_form, parse_target

DEFAULT_DT = 0.1
BISECT_XTOL = 1e-10


@dataclass(frozen=True, order=True)
class Cusp:
    """A cusp of the upper half-plane: the reduced fraction ``p/q``, or infinity when ``q == 0``."""

    p: int
    q: int

    def __post_init__(self):
        if self.q < 0 or (self.q == 0 and self.p != 1) or math.gcd(self.p, self.q) != 1:
            raise ValueError(f"({self.p}, {self.q}) is not a normalised cusp")

    @property
    def is_infinite(self) -> bool:
        return self.q == 0

    def __str__(self):
        return "inf" if self.is_infinite else f"{self.p}/{self.q}"


INFINITY = Cusp(1, 0)


@dataclass(frozen=True)
class ExcursionEvent:
    """One visit of a horocycle to the level-``rho`` disc at ``cusp``.

    ``depth_rho`` is the smallest level reached and ``t_deepest`` the time
    at which it is reached.
    """

    t_enter: float
    t_exit: float
    cusp: Cusp
    depth_rho: float
    t_deepest: float


@dataclass(frozen=True)
class RationalApprox:
    p: int
    q: int
    err: float
    t_found: float
    rho: float
    err_bound: float
    time_bound: float

    @property
    def within_err_bound(self) -> bool:
        return self.err < self.err_bound

    @property
    def within_time_bound(self) -> bool:
        return self.t_found < self.time_bound


def _check_rho(rho: float):
    if not 0.0 < rho <= 2.0:
        raise ValueError(f"rho must lie in (0, 2], got {rho}")


def disc_level(z, p: int, q: int):
    """Level ``2|qz - p|^2 / Im z`` of ``z`` relative to the cusp ``p/q`` (``q = 0``: infinity)."""
    z = np.asarray(z, dtype=complex)
    if q == 0:
        return 2.0 / z.imag
    w = q * z - p
    return 2.0 * (w.real**2 + w.imag**2) / z.imag


def region_classify(z: complex, rho: float, group: FuchsianGroup = FuchsianGroup.GAMMA2) -> Cusp | None:
    """Cusp whose level-``rho`` disc contains ``z``, or None when ``z`` projects into ``X^rho``.

    The lifted cusp region does not depend on ``group`` (see the module
    docstring); the argument is accepted for symmetry with the rest of the API.
    """
    _check_rho(rho)
    z = complex(z)
    if not z.imag > 0:
        raise ValueError("z must lie in the upper half-plane")
    FuchsianGroup.parse(group)
    p, q, level = cusp_levels(np.array([z.real]), np.array([z.imag]))
    if level[0] < rho:
        return Cusp(int(p[0]), int(q[0]))
    return None


# --- the explicit horocycle ----------------------------------------------------


def horocycle_path(alpha, T):
    """Base point of ``x0 u+(T)`` on the diameter-2 horocycle tangent at ``alpha``."""
    a = alpha_value(alpha)
    T = np.asarray(T, dtype=float)
    den = T * T + 1.0
    z = (a - 2.0 * T / den) + 2j / den
    return complex(z) if z.ndim == 0 else z


def horocycle_start(alpha) -> TangentPoint:
    """The lifted starting vector: at ``alpha + 2i`` pointing straight down.

    For ``alpha = "inf"`` the horocycle is the horizontal line ``Im z = 2``
    traversed to the right, the periodic control orbit.
    """
    if isinstance(alpha, str) and alpha.strip().lower() in ("inf", "infinity", "oo"):
        return TangentPoint(0.0, 2.0, math.pi / 2)
    return TangentPoint(alpha_value(alpha), 2.0, 1.5 * math.pi)


def horocycle_lift(alpha) -> UnimodularMatrix:
    return phi_inv(horocycle_start(alpha))


def _path_level(alpha, lin: float, p: int, q: int, T: float) -> float:
    # q z(T) - p = (q alpha - p) - 2 q T / (T^2+1) + 2 i q / (T^2+1)
    den = T * T + 1.0
    if q == 0:
        return den
    re = lin - 2.0 * q * T / den
    im = 2.0 * q / den
    return den * (re * re + im * im)


class LevelScan:
    """Grid scan of the cusp level along the horocycle tangent at ``alpha``.

    The grid is uniform in ``T`` with spacing ``dt``; it runs forward when
    ``direction = +1`` and backward (negative times) when ``direction = -1``,
    and can be extended on demand.  Excursions are then located exactly:
    along one excursion the level relative to its cusp is a convex quadratic
    in ``T`` with curvature at most the depth, so any disc the orbit enters
    shows up at the nearest grid point with level below ``rho (1 + dt^2)``,
    and the excursion is refined from there.  No grid resolution of the
    excursion chord is needed.
    """

    def __init__(self, alpha, dt: float = DEFAULT_DT, direction: int = 1, chunk: int = 1 << 18):
        if direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.alpha = alpha
        self._a = alpha_value(alpha)
        self.dt = float(dt)
        self.direction = direction
        self.chunk = chunk
        self._p = np.empty(0)
        self._q = np.empty(0)
        self._lev = np.empty(0)
        self._lin_cache: dict[tuple[int, int], float] = {}

    @property
    def n(self) -> int:
        return self._lev.size

    @property
    def t_max(self) -> float:
        return (self.n - 1) * self.dt if self.n else 0.0

    def times(self, lo: int = 0, hi: int | None = None) -> np.ndarray:
        hi = self.n if hi is None else hi
        return self.direction * self.dt * np.arange(lo, hi, dtype=float)

    def extend(self, T_max: float):
        n_target = int(math.floor(T_max / self.dt + 1e-9)) + 1
        parts_p, parts_q, parts_l = [self._p], [self._q], [self._lev]
        k = self.n
        while k < n_target:
            hi = min(n_target, k + self.chunk)
            z = horocycle_path(self._a, self.times(k, hi))
            p, q, lev = cusp_levels(np.atleast_1d(z.real), np.atleast_1d(z.imag))
            parts_p.append(p)
            parts_q.append(q)
            parts_l.append(lev)
            k = hi
        if len(parts_p) > 1:
            self._p = np.concatenate(parts_p)
            self._q = np.concatenate(parts_q)
            self._lev = np.concatenate(parts_l)
        return self

    def _lin(self, p: int, q: int) -> float:
        key = (p, q)
        if key not in self._lin_cache:
            self._lin_cache[key] = linear_form(self.alpha, p, q)
        return self._lin_cache[key]

    def _candidate_runs(self, rho: float, lo: int = 0):
        near = self._lev[lo:] < rho * (1.0 + self.dt * self.dt)
        idx = np.flatnonzero(near) + lo
        if idx.size == 0:
            return
        # split into runs of consecutive indices sharing a cusp
        brk = np.flatnonzero(
            (np.diff(idx) != 1) | (np.diff(self._p[idx]) != 0) | (np.diff(self._q[idx]) != 0)
        )
        starts = np.concatenate([[0], brk + 1])
        ends = np.concatenate([brk, [idx.size - 1]])
        for s, e in zip(starts, ends):
            yield int(idx[s]), int(idx[e])

    def _refine(self, i0: int, i1: int, rho: float) -> ExcursionEvent | None:
        p, q = int(self._p[i0]), int(self._q[i0])
        lin = self._lin(p, q)
        d = self.direction
        # work in the orbit's own clock u = d*T >= 0
        def level(u):
            return _path_level(self._a, lin, p, q, d * u)

        lo = max(0.0, (i0 - 1) * self.dt)
        hi = min(self.t_max, (i1 + 1) * self.dt)
        if hi <= lo:
            return None
        res = minimize_scalar(level, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        u_star, depth = float(res.x), float(res.fun)
        for edge in (lo, hi):
            if level(edge) < depth:
                u_star, depth = edge, level(edge)
        if not depth < rho:
            return None
        g = lambda u: level(u) - rho  # noqa: E731
        u_in = lo if g(lo) < 0 else bisect(g, lo, u_star, xtol=BISECT_XTOL)
        u_out = hi if g(hi) < 0 else bisect(g, u_star, hi, xtol=BISECT_XTOL)
        if d == 1:
            t_enter, t_exit = u_in, u_out
        else:
            t_enter, t_exit = -u_out, -u_in
        return ExcursionEvent(t_enter, t_exit, Cusp(p, q), depth, d * u_star)

    def events(self, rho: float, T_max: float | None = None) -> list[ExcursionEvent]:
        """All excursions into level-``rho`` discs for orbit times in ``[0, T_max]``."""
        _check_rho(rho)
        if T_max is not None and T_max > self.t_max:
            self.extend(T_max)
        out = []
        for i0, i1 in self._candidate_runs(rho):
            ev = self._refine(i0, i1, rho)
            if ev is not None:
                if T_max is not None and abs(ev.t_deepest) > T_max and min(abs(ev.t_enter), abs(ev.t_exit)) > T_max:
                    continue
                out.append(ev)
        return out

    def first_event(self, rho: float, T_cap: float, finite_only: bool = True) -> ExcursionEvent | None:
        """Earliest excursion into a level-``rho`` disc, extending the grid up to ``T_cap``."""
        _check_rho(rho)
        if self.n == 0:
            self.extend(min(T_cap, 64.0))
        lo = 0
        while True:
            for i0, i1 in self._candidate_runs(rho, lo):
                if finite_only and self._q[i0] == 0:
                    continue
                if i1 == self.n - 1 and self.t_max < T_cap:
                    break  # run touches the scan end; extend first
                ev = self._refine(i0, i1, rho)
                if ev is not None:
                    return ev
            if self.t_max >= T_cap:
                return None
            lo = max(0, self.n - 2)
            self.extend(min(T_cap, 2.0 * self.t_max + 64.0))


def excursions(
    alpha, rho: float, T_max: float, dt: float = DEFAULT_DT, direction: int = 1
) -> list[ExcursionEvent]:
    """Excursions of the horocycle tangent at ``alpha`` into level-``rho`` discs up to time ``T_max``.

    Parameters
    ----------
    alpha
        Tangency point; a target accepted by :func:`horoflow.targets.parse_target`
        or a float (floats are fine here, only continued-fraction work needs exact input).
    rho
        Cusp level in ``(0, 2)``.
    T_max
        Length of the orbit segment.
    dt
        Grid spacing in ``T``.
    direction
        ``-1`` scans negative times ``[-T_max, 0]``.

    Returns
    -------
    list of ExcursionEvent
        In order of increasing ``|t|``; entry and exit are bisected to ``1e-10``.
        An excursion still in progress when the window closes is reported
        with its exit at the end of the scanned grid.
    """
    return LevelScan(alpha, dt, direction).events(rho, T_max)


# --- rational approximation ------------------------------------------------------


def approximation_error(alpha, p: int, q: int) -> float:
    """``|alpha - p/q|`` at high precision."""
    t = parse_target(alpha)
    with mpmath.workdps(MP_DPS):
        return float(abs(t.mpf() - mpmath.mpf(p) / q))


def approximants(
    alpha,
    rho_seq,
    eps: float = 0.01,
    dt: float = DEFAULT_DT,
    T_cap: float = 1e7,
    strict: bool = True,
) -> list[RationalApprox]:
    """Rational approximants read off the first excursion below each level in ``rho_seq``.

    Each approximant carries the error bound ``(1+eps) pi / (3 q^2)`` and the
    time bound ``(1+eps) 2 pi / (3 rho)`` alongside the observed values.

    Raises
    ------
    BoundViolated
        When ``strict`` and some approximant misses the error bound.
    NoSolution
        When no excursion below some ``rho`` occurs before ``T_cap``.
    """
    target = parse_target(alpha)
    scan = LevelScan(target, dt)
    out = []
    for rho in rho_seq:
        ev = scan.first_event(float(rho), T_cap)
        if ev is None:
            raise NoSolution(f"no excursion below rho={rho} before T={T_cap}")
        p, q = ev.cusp.p, ev.cusp.q
        approx = RationalApprox(
            p=p,
            q=q,
            err=approximation_error(target, p, q),
            t_found=ev.t_enter,
            rho=float(rho),
            err_bound=(1.0 + eps) * math.pi / (3.0 * q * q),
            time_bound=(1.0 + eps) * 2.0 * math.pi / (3.0 * rho),
        )
        if strict and not approx.within_err_bound:
            raise BoundViolated(
                f"{p}/{q} at rho={rho}: |alpha - p/q| = {approx.err:.6g} >= {approx.err_bound:.6g}"
            )
        out.append(approx)
    return out


def cf_convergents(alpha, n: int) -> list[tuple[int, int]]:
    """First ``n`` continued-fraction convergents ``(p, q)``; fewer for a rational that terminates."""
    if n < 1:
        raise ValueError("n must be at least 1")
    coeffs = parse_target(alpha).partial_quotients(n)
    out = []
    p1, p0, q1, q0 = 1, 0, 0, 1
    for a in coeffs:
        p1, p0 = a * p1 + p0, p1
        q1, q0 = a * q1 + q0, q1
        out.append((p1, q1))
    return out


def semiconvergents(alpha, q_max: int) -> list[tuple[int, int]]:
    """All convergents and intermediate fractions ``(p_{k-1} + j p_k) / (q_{k-1} + j q_k)`` with ``q <= q_max``."""
    target = parse_target(alpha)
    out = []
    p1, p0, q1, q0 = 1, 0, 0, 1  # p_{-1}, p_{-2}, q_{-1}, q_{-2}
    n = 8
    done = 0
    while True:
        coeffs = target.partial_quotients(n)
        for a in coeffs[done:]:
            for j in range(1, a + 1):
                p, q = p0 + j * p1, q0 + j * q1
                if q > q_max:
                    return sorted(set(out), key=lambda pq: (pq[1], pq[0]))
                if q > 0:
                    out.append((p, q))
            p1, p0 = a * p1 + p0, p1
            q1, q0 = a * q1 + q0, q1
            if q1 > q_max:
                return sorted(set(out), key=lambda pq: (pq[1], pq[0]))
            out.append((p1, q1))  # the convergent itself (matters when a = 0)
        done = len(coeffs)
        if len(coeffs) < n:  # rational, expansion finished
            return sorted(set(out), key=lambda pq: (pq[1], pq[0]))
        n *= 2


def _log_g(q: int) -> float:
    return q * math.log(q)


_G_FUNCTIONS = {"n_log_n": _log_g}


def khinchin_hits(alpha, Q_max: int, g_name: str = "n_log_n") -> list[tuple[int, int]]:
    """Reduced ``p/q`` with ``2 <= q <= Q_max`` and ``|alpha - p/q| < 1 / (q g(q))``.

    ``q = 1`` is skipped: ``g(1) = 0`` makes its condition empty of content.
    """
    if Q_max < 2:
        raise ValueError("Q_max must be at least 2")
    try:
        g = _G_FUNCTIONS[g_name]
    except KeyError:
        raise ValueError(f"unknown g {g_name!r}; choose from {sorted(_G_FUNCTIONS)}") from None
    target = parse_target(alpha)
    hits = []
    with mpmath.workdps(MP_DPS):
        a = target.mpf()
        for q in range(2, Q_max + 1):
            qa = q * a
            base = int(mpmath.floor(qa))
            radius = 1.0 / g(q)  # |q alpha - p| < q / (q g(q))
            for p in (base, base + 1):
                if math.gcd(p, q) != 1:
                    continue
                if float(abs(qa - p)) < radius:
                    hits.append((p, q))
    return hits


def khinchin_count(alpha, g_name: str = "n_log_n", Q_max: int = 10_000) -> int:
    return len(khinchin_hits(alpha, Q_max, g_name))


def cusp_fraction(cusp: Cusp) -> Fraction | None:
    return None if cusp.is_infinite else Fraction(cusp.p, cusp.q)


def as_target(alpha) -> Target:
    if isinstance(alpha, Fraction):
        return RationalTarget(alpha)
    return parse_target(alpha)
