"""Uncentred random walks along a horocycle, against its Birkhoff averages.

Run: python3 demos/random_walk_dichotomy.py   (about 1 min)

A walk with Gaussian(1, 1) steps sits after m steps at time about m, spread
over sqrt(m).  If m lands at the bottom of a cusp excursion and the spread
is small next to the climb-out time, the walk sees only cusp.  Scheduling
needs b sqrt(m) < 0.1 / sqrt(rho_n); with m ~ 2q / e and rho_n ~ e^2
(e = q alpha - p) that means q e < 0.005, i.e. a partial quotient of a few
hundred.  The golden ratio never gets there, so we use an alpha whose
continued fraction has a 250 in it.
"""
import math

from horoflow.cusp_dioph import horocycle_start
from horoflow.ergodic import BumpFunction, space_average
from horoflow.errors import EmptySchedule
from horoflow.quotient import FuchsianGroup
from horoflow.random_walk import StepDistribution, breuillard_experiment, build_schedule
from horoflow.targets import parse_target

G = FuchsianGroup.GAMMA2
mu = StepDistribution.gaussian(1.0, 1.0)
levels = [0.5 * 0.9**k for k in range(200)]

try:
    build_schedule(parse_target("golden"), mu, levels, 1e5)
except EmptySchedule as exc:
    print("golden ratio:", exc)

alpha = parse_target("cf:0;1,1,1,1,1,1,250;(1)")
schedule = build_schedule(alpha, mu, levels, 1e5)
for e in schedule.entries:
    print(f"m = {e.m}, cusp {e.cusp}, depth {e.depth:.3g}, inside the disc for T in [{e.t_enter:.0f}, {e.t_exit:.0f}]")

# bump of radius 0.14 keeps its support in the compact core X^2
f = BumpFunction.centered(complex(0.5, math.sqrt(3) / 2), math.pi / 2, 0.14, G)
print(f"support level >= {f.rho_support:.3f}, Haar average {space_average(f, G, 1_000_000, 2)[0]:.4f}")
for row in breuillard_experiment(horocycle_start(alpha), f, mu, schedule, 40_000, 3, G):
    print(f"walk average {row.walk_avg:.4f} +- {row.walk_stderr:.4f}, Birkhoff average to T_n {row.birkhoff_avg:.4f}")

# The walk average vanishes as predicted.  The Birkhoff average at this T_n
# is far from 1 as well: before T_n the orbit shadows the short closed
# horocycles around 5/8 and 8/13 for tens of thousands of time units, so at
# desk-scale T the two averages do not separate the way the limit suggests.
