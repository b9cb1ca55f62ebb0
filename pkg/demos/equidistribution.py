"""Birkhoff averages of a bump along two horocycles on the thrice-punctured sphere.

Run: python3 demos/equidistribution.py   (about 20 s)
"""
import math

from horoflow.cusp_dioph import horocycle_start
from horoflow.ergodic import BumpFunction, equidistribution_curve, space_average
from horoflow.quotient import FuchsianGroup
from horoflow.targets import parse_target

G = FuchsianGroup.GAMMA2

# unit-integral bump of radius 0.2 at the hexagonal point, pointing up
f = BumpFunction.centered(complex(0.5, math.sqrt(3) / 2), math.pi / 2, 0.2, G)
space = space_average(f, G, 1_000_000, seed=1)
print(f"peak {f.peak:.1f}, Haar average {space[0]:.4f} +- {space[1]:.4f}")

T_list = [1e2, 1e3, 3e3, 1e4, 3e4, 1e5]
orbits = {
    "tangent at the golden ratio": horocycle_start(parse_target("golden")),
    "closed horocycle Im z = 2": horocycle_start("inf"),
}
for name, x0 in orbits.items():
    print(f"\n{name}")
    for r in equidistribution_curve(x0, f, T_list, 1e-2, G, space=space):
        print(f"  T = {r.T:>8.0f}   time average {r.time_avg:8.4f}   gap {r.relative_gap:7.2%}")

# The golden orbit spends long stretches near short closed horocycles in the
# cusps, so the averages wander at small T before settling near 1.
