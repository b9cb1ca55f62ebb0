"""Time averages along horocycle orbits against Haar space averages.

Orbits are evaluated through their lift: the point ``x0 u+(t)`` is the
matrix ``A U+(t) = [[a, a t + b], [c, c t + d]]`` whose entries grow only
linearly in ``t``, and every quadrature node is reduced to the fundamental
domain independently.  This avoids accumulating rounding error along a
chain of ``T/h`` small steps.  :func:`reduced_orbit` keeps the step-by-step
recursion for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .cusp_dioph import disc_level
from .errors import SupportEscapesCutoff
from .parallel import N_SHARDS, map_shards, shard_rngs, shard_sizes
from .psl2 import (
    TWO_PI,
    TangentPoint,
    UnimodularMatrix,
    compose,
    dist_arrays,
    horocycle_pos_matrix,
    phi,
    phi_arrays,
    phi_inv,
)
from .quotient import (
    FuchsianGroup,
    ReducedPoint,
    _reduce_scalar,
    bundle_volume,
    cusp_levels,
    in_fundamental_domain_arrays,
    reduce,
    reduce_arrays,
    _sample_inverse_square,
)

CHUNK = 1 << 18
NORMALIZATION_SAMPLES = 1_000_000
NORMALIZATION_SEED = 20240601


def bump_profile(u):
    """``exp(1 - 1/(1 - u^2))`` on ``|u| < 1``, zero elsewhere; equals 1 at the centre."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ui * ui))
    return out


def _ball_box(z: complex, theta: float, radius: float):
    """Box ``[x0,x1] x [y0,y1] x [t0,t1]`` containing the distance-``radius`` ball."""
    x, y = z.real, z.imag
    ry = y * math.sinh(radius)
    # transported angle difference is at most the hyperbolic distance
    return (x - ry, x + ry), (y * math.exp(-radius), y * math.exp(radius)), (theta - 2 * radius, theta + 2 * radius)


def _disc_inside_domain(z: complex, radius: float, group: FuchsianGroup) -> bool:
    cx, cy, rr = z.real, z.imag * math.cosh(radius), z.imag * math.sinh(radius)
    if group is FuchsianGroup.MODULAR:
        return abs(cx) + rr < 0.5 and math.hypot(cx, cy) > 1.0 + rr
    return abs(cx) + rr < 1.0 and math.hypot(cx - 0.5, cy) > 0.5 + rr and math.hypot(cx + 0.5, cy) > 0.5 + rr


@dataclass(frozen=True)
class BumpFunction:
    """Smooth bump ``normalization * phi(dist(p, center) / radius)`` on the quotient.

    The ball of radius ``radius`` about the centre must sit inside the open
    fundamental domain; then the identity translate realises the quotient
    distance on the support and evaluation needs no search over translates.
    ``rho_support`` is a certified lower bound for the cusp level on the
    support, so the support lies in ``X^rho_support``.
    """

    center: ReducedPoint
    radius: float
    normalization: float
    group: FuchsianGroup
    rho_support: float = field(default=0.0)

    @classmethod
    def centered(
        cls,
        z: complex,
        theta: float,
        radius: float,
        group: FuchsianGroup = FuchsianGroup.GAMMA2,
        normalize: bool = True,
        n_samples: int = NORMALIZATION_SAMPLES,
        seed: int = NORMALIZATION_SEED,
    ) -> BumpFunction:
        """Bump about ``(z, theta)``, scaled to unit integral when ``normalize`` is set."""
        group = FuchsianGroup.parse(group)
        if not radius > 0:
            raise ValueError("radius must be positive")
        z = complex(z)
        if not _disc_inside_domain(z, radius, group):
            raise ValueError(f"ball of radius {radius} about {z} leaves the {group.value} fundamental domain")
        center = reduce(TangentPoint(z.real, z.imag, theta), group)
        _, _, level = cusp_levels(np.array([z.real]), np.array([z.imag]))
        rho_support = float(level[0]) * math.exp(-radius)
        f = cls(center, float(radius), 1.0, group, rho_support)
        if not normalize:
            return f
        mass, _ = space_average(f, group, n_samples, seed)
        return cls(center, float(radius), 1.0 / mass, group, rho_support)

    def scaled(self, factor: float) -> BumpFunction:
        return BumpFunction(self.center, self.radius, self.normalization * factor, self.group, self.rho_support)

    @property
    def peak(self) -> float:
        return self.normalization

    def support_box(self):
        return _ball_box(self.center.point.z, self.center.point.theta, self.radius)

    def evaluate_arrays(self, x, y, theta):
        """Values at points already reduced to the fundamental domain of ``self.group``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        if self.normalization == 0.0:
            return out
        c = self.center.point
        (x0, x1), (y0, y1), _ = self.support_box()
        y = np.asarray(y, dtype=float)
        near = (x > x0) & (x < x1) & (y > y0) & (y < y1)
        if near.any():
            d = dist_arrays(x[near], y[near], np.asarray(theta, dtype=float)[near], c.x, c.y, c.theta)
            out[near] = self.normalization * bump_profile(d / self.radius)
        return out

    def __call__(self, p) -> float:
        q = reduce(p.point if isinstance(p, ReducedPoint) else p, self.group).point
        return float(self.evaluate_arrays(np.array([q.x]), np.array([q.y]), np.array([q.theta]))[0])


@dataclass(frozen=True)
class AverageReport:
    T: float
    time_avg: float
    space_avg: float
    mc_stderr: float
    quadrature_step: float

    @property
    def relative_gap(self) -> float:
        return abs(self.time_avg - self.space_avg) / abs(self.space_avg)


def space_average(f: BumpFunction, group: FuchsianGroup, n_samples: int, seed: int):
    """Monte Carlo estimate of the normalised Haar integral of ``f`` and its standard error.

    Samples are drawn from ``dx dy dtheta / y^2`` restricted to a box around
    the support (uniform ``x`` and ``theta``, inverse-transform ``y``),
    rejected against the fundamental domain, and sharded over a fixed number
    of independently seeded streams so the result does not depend on the
    thread count.

    Raises
    ------
    SupportEscapesCutoff
        If the support reaches above the cusp cutoff ``2 / f.rho_support``.
    """
    group = FuchsianGroup.parse(group)
    if f.group is not group:
        raise ValueError("bump and group disagree")
    if n_samples < 1000:
        raise ValueError("space_average needs at least 1000 samples")
    (x0, x1), (y0, y1), (t0, t1) = f.support_box()
    if f.rho_support <= 0 or y1 > 2.0 / f.rho_support * (1 + 1e-12):
        raise SupportEscapesCutoff(
            f"support reaches height {y1:.4g}, above the cutoff {2.0 / max(f.rho_support, 1e-300):.4g}"
        )
    box_measure = (x1 - x0) * (1.0 / y0 - 1.0 / y1) * (t1 - t0)

    def shard(args):
        rng, n = args
        x = rng.uniform(x0, x1, n)
        y = _sample_inverse_square(rng, n, y0, y1)
        th = rng.uniform(t0, t1, n)
        vals = f.evaluate_arrays(x, y, np.mod(th, TWO_PI))
        vals[~in_fundamental_domain_arrays(x, y, group)] = 0.0
        return vals.sum(), (vals * vals).sum()

    parts = map_shards(shard, list(zip(shard_rngs(seed, N_SHARDS), shard_sizes(n_samples, N_SHARDS))))
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s1 / n_samples
    var = max(s2 / n_samples - mean * mean, 0.0)
    scale = box_measure / bundle_volume(group)
    return scale * mean, scale * math.sqrt(var / n_samples)


# --- orbits -------------------------------------------------------------------------


def _lift(x0) -> UnimodularMatrix:
    if isinstance(x0, UnimodularMatrix):
        return x0
    if isinstance(x0, ReducedPoint):
        return phi_inv(x0.point)
    return phi_inv(x0)


def orbit_points(x0, times, group: FuchsianGroup):
    """Reduced ``(x, y, theta)`` of ``x0 u+(t)`` for each ``t`` in ``times``."""
    m = _lift(x0)
    t = np.asarray(times, dtype=float)
    px, py, pt = phi_arrays(m.a, m.a * t + m.b, m.c, m.c * t + m.d)
    return reduce_arrays(px, py, pt, group)


def _node_chunks(T_max: float, h: float):
    n = int(round(T_max / h))
    for lo in range(0, n, CHUNK):
        hi = min(n, lo + CHUNK)
        yield lo, hi, (np.arange(lo, hi, dtype=float) + 0.5) * h


def _time_averages(x0, f: BumpFunction, T_list, h: float, group: FuchsianGroup, direction: int = 1) -> list[float]:
    T_list = [float(T) for T in T_list]
    if any(T <= 0 for T in T_list) or any(b < a for a, b in zip(T_list, T_list[1:])):
        raise ValueError("T_list must be positive and increasing")
    if not 0 < h <= f.radius / 10 * (1 + 1e-12):
        raise ValueError(f"step h={h} does not resolve a bump of radius {f.radius}")
    counts = [int(round(T / h)) for T in T_list]
    out = [0.0] * len(T_list)
    if f.normalization == 0.0:
        return out
    total = 0.0
    k = 0
    for lo, hi, t in _node_chunks(T_list[-1], h):
        vals = f.evaluate_arrays(*orbit_points(x0, direction * t, group))
        csum = np.cumsum(vals)
        while k < len(counts) and counts[k] <= hi:
            idx = counts[k] - lo
            out[k] = total + (csum[idx - 1] if idx > 0 else 0.0)
            k += 1
        total += float(csum[-1])
    return [s / n for s, n in zip(out, counts)]


def birkhoff_average(x0, f: BumpFunction, T: float, h: float, group: FuchsianGroup = FuchsianGroup.GAMMA2) -> float:
    """Midpoint-rule estimate of ``(1/T) int_0^T f(x0 u+(t)) dt``.

    Nodes sit at ``(k + 1/2) h``; ``h`` must be at most a tenth of the bump
    radius so the integrand is resolved.
    """
    return _time_averages(x0, f, [T], h, FuchsianGroup.parse(group))[0]


def equidistribution_curve(
    x0,
    f: BumpFunction,
    T_list,
    h: float,
    group: FuchsianGroup = FuchsianGroup.GAMMA2,
    space: tuple[float, float] | None = None,
    n_samples: int = 1_000_000,
    seed: int = 0,
) -> list[AverageReport]:
    """Birkhoff averages at every ``T`` in ``T_list`` from a single orbit sweep.

    ``space`` may carry a precomputed ``(mean, stderr)``; otherwise the space
    average is estimated with ``n_samples`` draws from ``seed``.
    """
    group = FuchsianGroup.parse(group)
    if space is None:
        space = space_average(f, group, n_samples, seed)
    avgs = _time_averages(x0, f, T_list, h, group)
    return [AverageReport(float(T), a, space[0], space[1], h) for T, a in zip(T_list, avgs)]


def occupancy_fraction(x0, rho: float, T: float, h: float, group: FuchsianGroup = FuchsianGroup.GAMMA2) -> float:
    """Fraction of midpoint nodes in ``[0, T]`` whose base point projects into ``X^rho``."""
    if not 0 < rho < 2:
        raise ValueError("rho must lie in (0, 2)")
    FuchsianGroup.parse(group)
    m = _lift(x0)
    inside = 0
    n = 0
    for lo, hi, t in _node_chunks(T, h):
        px, py, _ = phi_arrays(m.a, m.a * t + m.b, m.c, m.c * t + m.d)
        _, _, level = cusp_levels(px, py)
        inside += int(np.count_nonzero(level >= rho))
        n += hi - lo
    return inside / n


def expected_core_fraction(rho: float, group: FuchsianGroup = FuchsianGroup.GAMMA2) -> float:
    """Haar mass of ``X^rho``: one minus (cusp area / covolume), ``1 - 3 rho / (2 pi)`` for either group."""
    from .quotient import covolume, cusp_region_area

    group = FuchsianGroup.parse(group)
    return 1.0 - cusp_region_area(group, rho) / covolume(group)


def cusp_time_ratio_limit(rho: float) -> float:
    """Small-depth limit ``sqrt(rho) / (sqrt(2) - sqrt(rho))`` of the time spent in ``N^rho`` over ``N^2 - N^rho``."""
    return math.sqrt(rho) / (math.sqrt(2.0) - math.sqrt(rho))


def line_excursion_ratio(rho: float, eps: float) -> float:
    """Time in the level-``rho`` disc at 0 over time in the level-2 annulus, along ``Im z = eps``.

    The horizontal horocycle is flowed from ``-1 + i eps`` through the cusp
    at 0; entry and exit of both discs are bisected on the flowed path.
    """
    if not 0 < rho < 2:
        raise ValueError("rho must lie in (0, 2)")
    if not 0 < eps < min(rho / 2, 1.0):
        raise ValueError("eps must be positive and below rho/2")
    m = phi_inv(TangentPoint(-1.0, eps, math.pi / 2))

    def z_at(t):
        p = phi(compose(m, horocycle_pos_matrix(t)))
        return complex(p.x, p.y)

    t_mid = 1.0 / eps  # the path passes over 0 at unit speed eps in x
    t_end = 2.0 / eps

    def chord(level):
        g = lambda t: float(disc_level(z_at(t), 0, 1)) - level  # noqa: E731
        t_in = bisect(g, 0.0, t_mid, xtol=1e-12, rtol=1e-15)
        t_out = bisect(g, t_mid, t_end, xtol=1e-12, rtol=1e-15)
        return t_out - t_in

    inner = chord(rho)
    return inner / (chord(2.0) - inner)


def reduced_orbit(x0, h: float, n_steps: int, group: FuchsianGroup = FuchsianGroup.GAMMA2):
    """Yield ``(x, y, theta)`` along ``p_{k+1} = reduce(p_k u+(h))``, starting from the reduction of ``x0``."""
    group = FuchsianGroup.parse(group)
    p = x0.point if isinstance(x0, ReducedPoint) else (phi(x0) if isinstance(x0, UnimodularMatrix) else x0)
    x, y, th, _ = _reduce_scalar(p.x, p.y, p.theta, group, 10_000)
    for _ in range(n_steps):
        half = 0.25 * math.pi - 0.5 * th
        cs, sn = math.cos(half), math.sin(half)
        sy = math.sqrt(y)
        a, c = sy * cs + x * sn / sy, sn / sy
        b, d = -sy * sn + x * cs / sy, cs / sy
        b, d = a * h + b, c * h + d
        n2 = d * d + c * c
        x, y = (b * d + a * c) / n2, 1.0 / n2
        th = 0.5 * math.pi - 2.0 * math.atan2(c, d)
        x, y, th, _ = _reduce_scalar(x, y, th, group, 10_000)
        yield x, y, th % TWO_PI
