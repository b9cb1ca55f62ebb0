"""How much of a horocycle lives in the cusps.

Run: python3 demos/cusp_time.py   (about 25 s)
"""
from horoflow.cusp_dioph import horocycle_start
from horoflow.ergodic import (
    cusp_time_ratio_limit,
    expected_core_fraction,
    line_excursion_ratio,
    occupancy_fraction,
)
from horoflow.quotient import FuchsianGroup
from horoflow.targets import parse_target

G = FuchsianGroup.GAMMA2
x0 = horocycle_start(parse_target("golden"))

print("fraction of [0, 1e5] spent in X^rho against its Haar mass 1 - 3 rho / 2 pi")
for rho in (0.25, 0.5, 1.0):
    print(f"  rho {rho:4}:  {occupancy_fraction(x0, rho, 1e5, 1e-2, G):.5f}   {expected_core_fraction(rho):.5f}")

# A horocycle running at height eps past the cusp at 0: time spent below
# level rho, divided by the time between the levels rho and 2.
print("\nline model, ratio against sqrt(rho) / (sqrt 2 - sqrt(rho))")
for rho in (0.1, 0.25, 0.5, 1.0, 1.5):
    got = [line_excursion_ratio(rho, eps) for eps in (1e-2, 1e-3, 1e-4)]
    print(f"  rho {rho:4}: " + "  ".join(f"{g:.5f}" for g in got) + f"   limit {cusp_time_ratio_limit(rho):.5f}")
