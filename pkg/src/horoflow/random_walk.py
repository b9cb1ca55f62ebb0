"""Uncentred random walks along a horocycle and the schedules that defeat equidistribution.

A walk with step law ``mu`` (mean ``a != 0``, standard deviation ``b``)
sits after ``m`` steps near time ``m a``, spread over a window of width
about ``b sqrt(m)``.  If ``m a`` is the deepest time of a cusp excursion
below level ``rho`` and the window is small against the time ``1/sqrt(rho)``
the orbit needs to climb back to the compact core, the walk sees only cusp
and a core-supported ``f`` averages to almost nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cusp_dioph import Cusp, LevelScan
from .ergodic import BumpFunction, _lift, _time_averages
from .errors import ConfigInvalid, EmptySchedule
from .parallel import N_SHARDS, map_shards, shard_rngs, shard_sizes
from .psl2 import phi_arrays
from .quotient import FuchsianGroup, reduce_arrays

SCHEDULE_CONSTANT = 0.1


@dataclass(frozen=True)
class StepDistribution:
    """Step law of the walk.

    ``kind`` is one of ``"gaussian"`` (params ``mean, std``),
    ``"shifted_exponential"`` (``rate, shift``), ``"empirical"`` (the sample
    values) or ``"point"`` (``mean``; degenerate, for testing only).
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        k, p = self.kind, self.params
        if k == "gaussian":
            if len(p) != 2 or not p[1] > 0:
                raise ValueError("gaussian needs (mean, std) with std > 0")
        elif k == "shifted_exponential":
            if len(p) != 2 or not p[0] > 0:
                raise ValueError("shifted_exponential needs (rate, shift) with rate > 0")
        elif k == "empirical":
            if len(p) < 2 or np.var(p) == 0.0:
                raise ValueError("empirical law needs at least two distinct samples")
        elif k == "point":
            if len(p) != 1:
                raise ValueError("point mass needs a single location")
        else:
            raise ValueError(f"unknown step law {k!r}")
        if not all(math.isfinite(v) for v in p):
            raise ValueError("step law parameters must be finite")
        if self.mean == 0.0:
            raise ValueError("the walk must be uncentred: mean step a = 0 is not allowed")

    @classmethod
    def gaussian(cls, mean: float, std: float) -> StepDistribution:
        return cls("gaussian", (mean, std))

    @classmethod
    def shifted_exponential(cls, rate: float, shift: float) -> StepDistribution:
        return cls("shifted_exponential", (rate, shift))

    @classmethod
    def empirical(cls, samples) -> StepDistribution:
        return cls("empirical", tuple(samples))

    @classmethod
    def point(cls, location: float) -> StepDistribution:
        return cls("point", (location,))

    @classmethod
    def parse(cls, text: str) -> StepDistribution:
        """``gaussian:a,b``, ``exp:rate,shift``, ``empirical:v1,v2,...`` or ``point:a``."""
        try:
            name, _, rest = text.partition(":")
            vals = [float(v) for v in rest.split(",") if v.strip()]
            kind = {"gaussian": "gaussian", "normal": "gaussian", "exp": "shifted_exponential",
                    "shifted_exponential": "shifted_exponential", "empirical": "empirical",
                    "point": "point"}[name.strip().lower()]
            return cls(kind, tuple(vals))
        except (KeyError, ValueError) as exc:
            raise ConfigInvalid(f"bad step law {text!r}: {exc}") from None

    @property
    def mean(self) -> float:
        k, p = self.kind, self.params
        if k == "gaussian" or k == "point":
            return p[0]
        if k == "shifted_exponential":
            return p[1] + 1.0 / p[0]
        return float(np.mean(p))

    @property
    def std(self) -> float:
        k, p = self.kind, self.params
        if k == "gaussian":
            return p[1]
        if k == "shifted_exponential":
            return 1.0 / p[0]
        if k == "point":
            return 0.0
        return float(np.std(p))

    def sample_sums(self, rng: np.random.Generator, m: int, n: int) -> np.ndarray:
        """``n`` independent draws of the ``m``-step sum."""
        k, p = self.kind, self.params
        if k == "gaussian":
            return rng.normal(m * p[0], p[1] * math.sqrt(m), n)
        if k == "shifted_exponential":
            return rng.gamma(m, 1.0 / p[0], n) + m * p[1]
        if k == "point":
            return np.full(n, m * p[0])
        values = np.asarray(p)
        counts = rng.multinomial(m, np.full(values.size, 1.0 / values.size), size=n)
        return counts @ values

    def __str__(self):
        return f"{self.kind}:{','.join(f'{v:g}' for v in self.params)}"


@dataclass(frozen=True)
class ScheduleEntry:
    m: int
    T_n: float
    rho_n: float
    sigma_m: float
    cusp: Cusp
    depth: float
    t_enter: float
    t_exit: float


@dataclass(frozen=True)
class WalkSchedule:
    entries: tuple[ScheduleEntry, ...]
    a: float
    b: float
    constant: float = SCHEDULE_CONSTANT

    def __len__(self):
        return len(self.entries)

    def violations(self) -> list[ScheduleEntry]:
        """Entries breaking ``m = round(T_n / a)`` or ``b sqrt(m) < constant / sqrt(rho_n)``."""
        bad = []
        for e in self.entries:
            if e.m != round(e.T_n / self.a) or not e.sigma_m < self.constant / math.sqrt(e.rho_n):
                bad.append(e)
        return bad


def build_schedule(
    alpha,
    mu: StepDistribution,
    rho_seq,
    T_max: float,
    dt: float = 0.1,
    constant: float = SCHEDULE_CONSTANT,
) -> WalkSchedule:
    """Walk lengths ``m`` landing at the deepest point of cusp excursions.

    The horocycle is scanned once (forward for ``a > 0``, backward for
    ``a < 0``) over ``|t| <= T_max``.  Each excursion below ``max(rho_seq)``
    is charged to the smallest level ``rho_n`` in ``rho_seq`` it dips under;
    ``T_n`` is its deepest time and ``m = round(T_n / a)``.  The entry is
    kept when ``b sqrt(m) < constant / sqrt(rho_n)``.

    Raises
    ------
    EmptySchedule
        If no excursion before ``T_max`` meets the variance condition.
    """
    a, b = mu.mean, mu.std
    levels = sorted(float(r) for r in rho_seq)
    if not levels or levels[0] <= 0 or levels[-1] >= 2:
        raise ValueError("rho_seq must lie in (0, 2)")
    scan = LevelScan(alpha, dt, 1 if a > 0 else -1)
    events = scan.events(levels[-1], T_max)
    entries = []
    for ev in events:
        rho_n = next(r for r in levels if r > ev.depth_rho)
        m = int(round(ev.t_deepest / a))
        if m < 1:
            continue
        sigma = b * math.sqrt(m)
        if sigma < constant / math.sqrt(rho_n):
            entries.append(ScheduleEntry(m, ev.t_deepest, rho_n, sigma, ev.cusp, ev.depth_rho, ev.t_enter, ev.t_exit))
    if not entries:
        raise EmptySchedule(
            f"no excursion with |t| <= {T_max:g} satisfies b*sqrt(m) < {constant}/sqrt(rho_n) for {mu}"
        )
    entries.sort(key=lambda e: e.m)
    return WalkSchedule(tuple(entries), a, b, constant)


def _values_at_times(x0, f: BumpFunction, t: np.ndarray, group: FuchsianGroup) -> np.ndarray:
    A = _lift(x0)
    px, py, pt = phi_arrays(A.a, A.a * t + A.b, A.c, A.c * t + A.d)
    return f.evaluate_arrays(*reduce_arrays(px, py, pt, group))


def convolution_average(
    x0,
    f: BumpFunction,
    mu: StepDistribution,
    m: int,
    n_samples: int,
    seed: int,
    group: FuchsianGroup = FuchsianGroup.GAMMA2,
):
    """Monte Carlo ``int f(x0 u+(t)) mu^{*m}(dt)``; returns ``(mean, stderr)``.

    Each draw is an ``m``-step sum evaluated on the lifted orbit and reduced
    to the fundamental domain.  Sharded with fixed per-shard seeds.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    group = FuchsianGroup.parse(group)

    def shard(args):
        rng, n = args
        vals = _values_at_times(x0, f, mu.sample_sums(rng, m, n), group)
        return vals.sum(), (vals * vals).sum()

    parts = map_shards(shard, list(zip(shard_rngs(seed, N_SHARDS), shard_sizes(n_samples, N_SHARDS))))
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s1 / n_samples
    var = max(s2 / n_samples - mean * mean, 0.0)
    return mean, math.sqrt(var / n_samples)


@dataclass(frozen=True)
class BreuillardRow:
    m: int
    T_n: float
    rho_n: float
    walk_avg: float
    walk_stderr: float
    birkhoff_avg: float


def breuillard_experiment(
    x0,
    f: BumpFunction,
    mu: StepDistribution,
    schedule: WalkSchedule,
    n_samples: int,
    seed: int,
    group: FuchsianGroup = FuchsianGroup.GAMMA2,
    h: float | None = None,
) -> list[BreuillardRow]:
    """Walk averages at the scheduled ``m`` beside the Birkhoff averages up to ``T_n``.

    Birkhoff averages use one orbit sweep with midpoint step ``h``
    (default: a tenth of the bump radius); for ``a < 0`` they average over
    ``[T_n, 0]``.
    """
    group = FuchsianGroup.parse(group)
    if not schedule.entries:
        return []
    h = f.radius / 10 if h is None else h
    sign = 1.0 if schedule.a > 0 else -1.0
    lift = _lift(x0)
    T_abs = sorted({abs(e.T_n) for e in schedule.entries})
    birk = dict(zip(T_abs, _time_averages(lift, f, T_abs, h, group, direction=int(sign))))
    seeds = np.random.SeedSequence(seed).spawn(len(schedule.entries))
    rows = []
    for e, ss in zip(schedule.entries, seeds):
        walk, err = convolution_average(lift, f, mu, e.m, n_samples, int(ss.generate_state(1)[0]), group)
        rows.append(BreuillardRow(e.m, e.T_n, e.rho_n, walk, err, birk[abs(e.T_n)]))
    return rows

