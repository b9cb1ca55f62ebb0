"""``horoflow`` command-line experiment runner.

Every subcommand reads optional ``key=value`` defaults from ``--config`` and
lets flags override them, writes a JSON result document (inputs, outputs,
library version) to ``--out-json`` or stdout, and, where a series exists,
a CSV table to ``--out-csv``.  Files are written atomically.

Exit codes: 0 success, 2 configuration error, 3 numerical precondition
failure, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .errors import BoundViolated, ConfigInvalid, HoroflowError
from .quotient import FuchsianGroup

# --- configuration -----------------------------------------------------------------


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment, keys use ``-`` or ``_`` interchangeably."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path!r}: {exc}") from None
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"{path}:{n}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


class Params:
    """Merged view of flags and config entries with typed accessors."""

    def __init__(self, args: argparse.Namespace, config: dict[str, str]):
        self.args = args
        self.config = config
        self.used: dict[str, object] = {}

    def _raw(self, key, default):
        v = getattr(self.args, key, None)
        if v is None:
            v = self.config.get(key, default)
        return v

    def get(self, key, conv, default=None, check=None, why=""):
        raw = self._raw(key, default)
        if raw is None:
            raise ConfigInvalid(f"missing required parameter {key!r}")
        try:
            value = conv(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"parameter {key}={raw!r}: {exc}") from None
        if check is not None and not check(value):
            raise ConfigInvalid(f"parameter {key}={raw!r} out of range{': ' + why if why else ''}")
        self.used[key] = value if not isinstance(value, FuchsianGroup) else value.value
        return value


def _float(v):
    return float(v)


def _int(v):
    f = float(v)
    if f != int(f):
        raise ValueError("expected an integer")
    return int(f)


def _floats(v):
    if isinstance(v, (list, tuple)):
        return [float(x) for x in v]
    return [float(x) for x in str(v).split(",") if x.strip()]


def _group(v):
    return FuchsianGroup.parse(v)


def rho_sequence(spec: str) -> list[float]:
    """``harmonic:N`` (1/n for n <= N), ``geometric:start,ratio,count`` or a comma list."""
    spec = str(spec).strip()
    if spec.startswith("harmonic:"):
        n = int(spec.split(":", 1)[1])
        if n < 1:
            raise ValueError("harmonic count must be positive")
        return [1.0 / k for k in range(1, n + 1)]
    if spec.startswith("geometric:"):
        start, ratio, count = spec.split(":", 1)[1].split(",")
        return [float(start) * float(ratio) ** k for k in range(int(count))]
    return _floats(spec)


def _point(v):
    vals = _floats(v)
    if len(vals) != 3 or not vals[1] > 0:
        raise ValueError("expected x,y,theta with y > 0")
    return vals


# --- output -------------------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".horoflow-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def emit(args, command: str, params: Params, outputs: dict, table=None):
    doc = {
        "command": command,
        "inputs": _jsonable(params.used),
        "outputs": _jsonable(outputs),
        "version": __version__,
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out_json:
        atomic_write(args.out_json, text)
    else:
        sys.stdout.write(text)
    if table is not None and args.out_csv:
        atomic_write(args.out_csv, _csv_text(*table))


# --- subcommands ---------------------------------------------------------------------


def cmd_verify_identities(args, P: Params):
    from .checks import identity_residuals

    n = P.get("samples", _int, 10_000, lambda v: v > 0)
    seed = P.get("seed", _int, 0)
    res = identity_residuals(n, seed)
    for name, value in res.items():
        print(f"{name:<32s} {value:.3e}", file=sys.stderr)
    emit(args, "verify-identities", P, {"max_residuals": res})


def cmd_flow(args, P: Params):
    from .psl2 import FlowKind, TangentPoint, flow
    from .quotient import reduce

    x, y, th = P.get("point", _point, "0,1,1.5707963267948966")
    kind = P.get("kind", lambda v: FlowKind(v), "horocycle+")
    P.used["kind"] = kind.value
    T = P.get("T", _float, 1.0)
    steps = P.get("steps", _int, 10, lambda v: v >= 1)
    group = P.get("group", lambda v: None if str(v) == "none" else _group(v), "none")
    p0 = TangentPoint(x, y, th)
    rows = []
    for k in range(steps + 1):
        t = T * k / steps
        p = flow(p0, kind, t)
        if group is not None:
            p = reduce(p, group).point
        rows.append((t, p.x, p.y, p.theta))
    emit(args, "flow", P, {"final": rows[-1]}, (("t", "x", "y", "theta"), rows))


def cmd_reduce(args, P: Params):
    from .psl2 import TangentPoint
    from .quotient import reduce

    x, y, th = P.get("point", _point)
    group = P.get("group", _group, "gamma2")
    r = reduce(TangentPoint(x, y, th), group)
    emit(
        args,
        "reduce",
        P,
        {"point": r.point.as_tuple(), "deck": [r.deck.a, r.deck.b, r.deck.c, r.deck.d]},
    )


def cmd_area(args, P: Params):
    from .quotient import covolume, cusp_region_area, mc_cusp_area, mc_domain_area

    group = P.get("group", _group, "gamma2")
    n = P.get("samples", _int, 1_000_000, lambda v: v >= 1000)
    seed = P.get("seed", _int, 0)
    rhos = P.get("rho_list", _floats, "0.25,0.5,1", lambda v: all(0 < r <= 2 for r in v))
    est, err = mc_domain_area(group, n, seed)
    rows = []
    for k, rho in enumerate(rhos):
        a, e = mc_cusp_area(group, rho, n, seed + 1 + k)
        rows.append((rho, a, e, cusp_region_area(group, rho)))
    emit(
        args,
        "area",
        P,
        {"covolume_mc": est, "covolume_stderr": err, "covolume_exact": covolume(group), "cusp_areas": rows},
        (("rho", "area_mc", "stderr", "area_exact"), rows),
    )


def _bump(P: Params, default_radius: float):
    from .ergodic import BumpFunction

    group = P.get("group", _group, "gamma2")
    radius = P.get("radius", _float, default_radius, lambda v: v > 0)
    cx, cy, cth = P.get("center", _point, f"0.5,{math.sqrt(3) / 2!r},{math.pi / 2!r}")
    try:
        return BumpFunction.centered(complex(cx, cy), cth, radius, group), group
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from None


def _start(P: Params):
    from .cusp_dioph import horocycle_start

    alpha = P.get("alpha", str, "golden")
    return alpha, horocycle_start(_alpha_arg(alpha))


def _alpha_arg(alpha: str):
    from .targets import parse_target

    if alpha.strip().lower() in ("inf", "infinity", "oo"):
        return "inf"
    try:
        return parse_target(alpha)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"alpha={alpha!r}: {exc}") from None


def cmd_sample_space(args, P: Params):
    from .ergodic import space_average

    f, group = _bump(P, 0.2)
    n = P.get("samples", _int, 1_000_000, lambda v: v >= 1000)
    seed = P.get("seed", _int, 0)
    mean, err = space_average(f, group, n, seed)
    emit(args, "sample-space", P, {"mean": mean, "stderr": err, "normalization": f.normalization})


def cmd_equidist(args, P: Params):
    from .ergodic import equidistribution_curve

    alpha, x0 = _start(P)
    f, group = _bump(P, 0.2)
    T = P.get("T", _float, 1e5, lambda v: v > 0)
    T_list = P.get("T_list", _floats, ",".join(repr(T / 10**k) for k in (2, 1, 0) if T / 10**k >= 1))
    if sorted(T_list) != T_list or T_list[-1] > T:
        raise ConfigInvalid("T_list must be increasing and end at or before T")
    h = P.get("h", _float, 1e-2, lambda v: 0 < v <= f.radius / 10, "h must resolve the bump (h <= radius/10)")
    n = P.get("samples", _int, 1_000_000, lambda v: v >= 1000)
    seed = P.get("seed", _int, 0)
    reports = equidistribution_curve(x0, f, T_list, h, group, n_samples=n, seed=seed)
    rows = [(r.T, r.time_avg, r.space_avg, r.mc_stderr) for r in reports]
    emit(
        args,
        "equidist",
        P,
        {"reports": [dict(zip(("T", "time_avg", "space_avg", "mc_stderr"), r)) for r in rows]},
        (("T", "time_avg", "space_avg", "mc_stderr"), rows),
    )


def cmd_occupancy(args, P: Params):
    from .ergodic import expected_core_fraction, occupancy_fraction

    alpha, x0 = _start(P)
    group = P.get("group", _group, "gamma2")
    rhos = P.get("rho_list", _floats, "0.25,0.5", lambda v: all(0 < r < 2 for r in v))
    T = P.get("T", _float, 1e5, lambda v: v > 0)
    h = P.get("h", _float, 1e-2, lambda v: v > 0)
    rows = [(rho, occupancy_fraction(x0, rho, T, h, group), expected_core_fraction(rho, group)) for rho in rhos]
    emit(args, "occupancy", P, {"fractions": rows}, (("rho", "fraction", "haar_mass"), rows))


def cmd_excursions(args, P: Params):
    from .cusp_dioph import excursions

    alpha = P.get("alpha", str, "sqrt2")
    rho = P.get("rho", _float, 0.5, lambda v: 0 < v < 2)
    T_max = P.get("T_max", _float, 1e3, lambda v: v > 0)
    dt = P.get("dt", _float, 0.1, lambda v: 0 < v <= 0.5)
    events = excursions(_alpha_arg(alpha), rho, T_max, dt)
    rows = [(e.t_enter, e.t_exit, str(e.cusp), e.depth_rho, e.t_deepest) for e in events]
    emit(args, "excursions", P, {"count": len(rows)}, (("t_enter", "t_exit", "cusp", "depth_rho", "t_deepest"), rows))


def cmd_dioph(args, P: Params):
    from .cusp_dioph import approximants, semiconvergents

    alpha = P.get("alpha", str, "sqrt2")
    rhos = P.get("rho_seq", rho_sequence, "harmonic:50", lambda v: len(v) > 0 and all(0 < r <= 1 for r in v))
    eps = P.get("eps", _float, 0.01, lambda v: v >= 0)
    target = _alpha_arg(alpha)
    apps = approximants(target, rhos, eps, strict=False)
    q_top = max(a.q for a in apps)
    semis = set(semiconvergents(target, q_top))
    rows = [
        (a.rho, a.p, a.q, a.err, a.err_bound, a.t_found, a.time_bound, (a.p, a.q) in semis)
        for a in apps
    ]
    out = {
        "all_err_bounds_hold": all(a.within_err_bound for a in apps),
        "all_time_bounds_hold": all(a.within_time_bound for a in apps),
        "all_semiconvergents": all(r[-1] for r in rows),
    }
    emit(
        args,
        "dioph",
        P,
        out,
        (("rho", "p", "q", "err", "err_bound", "t_found", "time_bound", "semiconvergent"), rows),
    )
    bad = [a for a in apps if not a.within_err_bound]
    if bad:
        a = bad[0]
        raise BoundViolated(f"{a.p}/{a.q} at rho={a.rho:g}: error {a.err:.6g} >= bound {a.err_bound:.6g}")


def cmd_walk(args, P: Params):
    from .random_walk import StepDistribution, breuillard_experiment, build_schedule

    alpha, x0 = _start(P)
    mu = P.get("mu", StepDistribution.parse, "gaussian:1,1")
    P.used["mu"] = str(mu)
    rhos = P.get("rho_seq", rho_sequence, "harmonic:4000", lambda v: len(v) > 0 and all(0 < r < 2 for r in v))
    T_max = P.get("T_max", _float, 1e5, lambda v: v > 0)
    constant = P.get("constant", _float, 0.1, lambda v: v > 0)
    f, group = _bump(P, 0.14)
    n = P.get("samples", _int, 20_000, lambda v: v >= 100)
    seed = P.get("seed", _int, 0)
    schedule = build_schedule(_alpha_arg(alpha), mu, rhos, T_max, constant=constant)
    rows = breuillard_experiment(x0, f, mu, schedule, n, seed, group)
    table = [(r.m, r.T_n, r.rho_n, r.walk_avg, r.walk_stderr, r.birkhoff_avg) for r in rows]
    emit(
        args,
        "walk",
        P,
        {"entries": len(table), "min_walk_avg": min(r.walk_avg for r in rows)},
        (("m", "T_n", "rho_n", "walk_avg", "walk_stderr", "birkhoff_avg"), table),
    )


COMMANDS = {
    "verify-identities": (cmd_verify_identities, "group laws, equivariance, the geodesic/horocycle conjugation identity and the shadowing reparametrisation, with max residuals"),
    "flow": (cmd_flow, "geodesic or horocycle orbit samples of a tangent vector, optionally reduced"),
    "reduce": (cmd_reduce, "fundamental-domain reduction of one tangent vector and its deck transformation"),
    "area": (cmd_area, "Monte Carlo covolume and cusp-neighbourhood areas of the quotient surface"),
    "equidist": (cmd_equidist, "equidistribution of a horocycle: Birkhoff averages of a bump against its Haar average"),
    "occupancy": (cmd_occupancy, "fraction of horocycle time spent in the compact part X^rho"),
    "excursions": (cmd_excursions, "cusp excursions of the horocycle tangent at alpha and the rationals they visit"),
    "dioph": (cmd_dioph, "rational approximations from first cusp excursions, checked against the pi/3 bound and continued fractions"),
    "walk": (cmd_walk, "uncentred random walks along the horocycle scheduled into deep cusp excursions"),
    "sample-space": (cmd_sample_space, "Haar space average of a bump function"),
}

_FLAGS = {
    "verify-identities": ["samples", "seed"],
    "flow": ["point", "kind", "T", "steps", "group"],
    "reduce": ["point", "group"],
    "area": ["group", "samples", "seed", "rho-list"],
    "equidist": ["alpha", "group", "radius", "center", "T", "T-list", "h", "samples", "seed"],
    "occupancy": ["alpha", "group", "rho-list", "T", "h"],
    "excursions": ["alpha", "rho", "T-max", "dt"],
    "dioph": ["alpha", "rho-seq", "eps"],
    "walk": ["alpha", "mu", "rho-seq", "T-max", "constant", "group", "radius", "center", "samples", "seed"],
    "sample-space": ["group", "radius", "center", "samples", "seed"],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="horoflow", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"horoflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--config", help="key=value file supplying defaults")
        sp.add_argument("--out-json", help="write the JSON result here instead of stdout")
        sp.add_argument("--out-csv", help="write the series table here")
        for flag in _FLAGS[name]:
            sp.add_argument(f"--{flag}", dest=flag.replace("-", "_"), default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = read_config(args.config) if args.config else {}
        unknown = set(config) - {f.replace("-", "_") for f in _FLAGS[args.command]}
        if unknown:
            raise ConfigInvalid(f"unknown config keys for {args.command}: {sorted(unknown)}")
        from .parallel import worker_count

        worker_count()  # validate HOROFLOW_THREADS early
        COMMANDS[args.command][0](args, Params(args, config))
    except HoroflowError as exc:
        print(f"horoflow: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"horoflow: PreconditionError: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
