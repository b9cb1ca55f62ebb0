"""Rational approximations read off the cusp excursions of one horocycle.

Run: python3 demos/diophantine.py   (a few seconds)
"""
import math

from horoflow.cusp_dioph import approximants, excursions, khinchin_hits, semiconvergents
from horoflow.targets import parse_target

rho_seq = [1 / n for n in range(1, 51)]

for name in ("sqrt2", "golden", "pi-3"):
    alpha = parse_target(name)
    apps = approximants(alpha, rho_seq, strict=False)
    semis = set(semiconvergents(alpha, max(a.q for a in apps)))
    print(f"\n{name} = {alpha.value:.12f}")
    print("     rho      p/q     q^2 |alpha - p/q|   T_n     2pi/3rho   in CF")
    seen = set()
    for a in apps:
        if (a.p, a.q) in seen:
            continue
        seen.add((a.p, a.q))
        print(
            f"  {a.rho:7.4f} {a.p:>5}/{a.q:<5} {a.err * a.q * a.q:12.6f}"
            f"  {a.t_found:8.2f} {a.time_bound:9.2f}   {(a.p, a.q) in semis}"
        )
    print(f"  pi/3 = {math.pi / 3:.6f}, 1/sqrt5 = {1 / math.sqrt(5):.6f}")

# Only fractions below alpha are met going forward in time, and the depth of
# the visit to p/q is exactly (q alpha - p)^2.  Later excursions need not be
# continued-fraction fractions: 5/4 shows up for sqrt2.
print("\nsqrt2 excursions below rho = 0.5 up to T = 200:")
for e in excursions(parse_target("sqrt2"), 0.5, 200):
    print(f"  {str(e.cusp):>6}  depth {e.depth_rho:.4f}  deepest at T = {e.t_deepest:.2f}")

print("\n|alpha - p/q| < 1/(q^2 log q), q <= 10^4")
for name in ("golden", "sqrt2", "pi-3", "e-2"):
    print(f"  {name:7} {khinchin_hits(name, 10_000)}")
