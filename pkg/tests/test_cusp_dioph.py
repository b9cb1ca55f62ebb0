import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horoflow.cusp_dioph import (
    INFINITY,
    Cusp,
    LevelScan,
    approximants,
    cf_convergents,
    disc_level,
    excursions,
    horocycle_lift,
    horocycle_path,
    khinchin_count,
    khinchin_hits,
    region_classify,
    semiconvergents,
)
from horoflow.errors import BoundViolated
from horoflow.psl2 import UnimodularMatrix, compose, horocycle_pos_matrix, phi
from horoflow.targets import parse_target


def brute_classify(z: complex, rho: float):
    """Every cusp whose lifted disc contains z, by direct circle geometry."""
    found = []
    if z.imag > 2 / rho:
        found.append(INFINITY)
    q_top = int(math.sqrt(rho / (2 * z.imag))) + 2
    for q in range(1, q_top + 1):
        r = rho / (4 * q * q)
        for p in range(math.floor(q * z.real) - 2, math.floor(q * z.real) + 3):
            if math.gcd(p, q) == 1 and abs(z - complex(p / q, r)) < r:
                found.append(Cusp(p, q))
    return found


def oracle_excursions(alpha: str, rho: float, T_max: float, direction: int = 1):
    """Closed form: level along the path is (eT - 2q)^2 + e^2 with e = q alpha - p."""
    with mpmath.workdps(60):
        a = parse_target(alpha).mpf()
        out = {}
        q_top = int(T_max * math.sqrt(rho)) + 2
        for q in range(1, q_top):
            for p in (int(mpmath.floor(q * a)), int(mpmath.floor(q * a)) + 1):
                e = float(q * a - p)
                if math.gcd(p, q) != 1 or e * direction <= 0 or e * e >= rho:
                    continue
                t_deep = 2 * q / e
                half = math.sqrt(rho - e * e) / abs(e)
                if abs(t_deep) - half <= T_max:  # entered within the window
                    out[Cusp(p, q)] = (t_deep - half, t_deep + half, e * e, t_deep)
    return out


def test_region_examples():
    assert region_classify(5j, 0.5) == INFINITY
    assert region_classify(1j * 0.5 / 8, 0.5) == Cusp(0, 1)
    assert region_classify(0.5 + 0.5j, 0.1) is None
    assert brute_classify(0.5 + 0.5j, 0.1) == []
    with pytest.raises(ValueError):
        region_classify(1j, 2.5)


def test_disc_level_closed_form():
    z = 0.3 + 0.02j
    assert disc_level(z, 1, 3) == pytest.approx(2 * abs(3 * z - 1) ** 2 / 0.02)
    # inside the disc at p/q iff the level is below rho
    rho, q, p = 0.7, 3, 1
    centre = complex(p / q, rho / (4 * q * q))
    assert disc_level(centre, p, q) < rho
    assert disc_level(centre + 1.01j * rho / (4 * q * q), p, q) > rho


@settings(max_examples=400, deadline=None)
@given(
    st.floats(-3, 3),
    st.floats(-7, 1).map(lambda e: 10.0**e),
    st.sampled_from([0.1, 0.5, 1.0, 2.0]),
)
def test_classification_matches_brute_force(x, y, rho):
    z = complex(x, y)
    hits = brute_classify(z, rho)
    assert len(hits) <= 1  # the discs are disjoint
    got = region_classify(z, rho)
    if hits:
        h = hits[0]
        assert got == h or abs(disc_level(z, h.p, h.q) - rho) < 1e-9 * rho
    else:
        assert got is None or abs(disc_level(z, got.p, got.q) - rho) < 1e-9 * rho


def test_discs_disjoint_on_random_points():
    rng = np.random.default_rng(9)
    z = rng.uniform(-1, 1, 100_000) + 1j * 10.0 ** rng.uniform(-5, 0.5, 100_000)
    for zi in z[:: 50]:
        assert len(brute_classify(complex(zi), 2.0)) <= 1


def test_path_examples():
    assert horocycle_path("sqrt2", 0.0) == pytest.approx(2**0.5 + 2j)
    assert horocycle_path("sqrt2", 1.0) == pytest.approx(2**0.5 - 1 + 1j)
    T = 1e3
    expected = 2**0.5 - 2 * T / (T * T + 1) + 2j / (T * T + 1)
    assert abs(horocycle_path("sqrt2", T) - expected) < 1e-15


@pytest.mark.parametrize("alpha", ["sqrt2", "golden", "pi-3"])
def test_path_agrees_with_matrix_flow(alpha):
    lift = horocycle_lift(alpha)
    for T in np.linspace(-1000, 1000, 41):
        p = phi(compose(lift, horocycle_pos_matrix(T)))
        z = horocycle_path(alpha, T)
        assert abs(p.x - z.real) < 1e-9 and abs(p.y - z.imag) < 1e-9 * max(1, z.imag)


@pytest.mark.parametrize("alpha,rho,direction", [("sqrt2", 0.5, 1), ("golden", 0.2, 1), ("pi-3", 0.05, 1), ("sqrt2", 0.3, -1)])
def test_excursions_match_closed_form(alpha, rho, direction):
    T_max = 1e3
    events = excursions(parse_target(alpha), rho, T_max, direction=direction)
    oracle = oracle_excursions(alpha, rho, T_max, direction)
    assert {e.cusp for e in events} == set(oracle)
    for e in events:
        t_in, t_out, depth, t_deep = oracle[e.cusp]
        assert e.t_enter < e.t_exit
        if abs(t_out) > T_max:  # still inside the disc when the window closes
            assert abs(e.t_exit) == pytest.approx(T_max)
            continue
        assert (e.t_enter, e.t_exit) == pytest.approx((t_in, t_out), abs=1e-8)
        assert e.depth_rho == pytest.approx(depth, rel=1e-7)
        assert e.t_deepest == pytest.approx(t_deep, rel=1e-6)
        assert disc_level(horocycle_path(alpha, e.t_deepest), e.cusp.p, e.cusp.q) < rho


def test_sqrt2_excursions_known_list():
    events = excursions(parse_target("sqrt2"), 0.5, 1e3)
    fracs = [Fraction(e.cusp.p, e.cusp.q) for e in events]
    # fractions below sqrt2 with |q sqrt2 - p| < sqrt(1/2), in time order 2q / (q sqrt2 - p)
    assert fracs[:5] == [Fraction(1), Fraction(5, 4), Fraction(4, 3), Fraction(15, 11), Fraction(11, 8)]
    # 5/4 is visited too, although it is not a semiconvergent of sqrt2
    assert Fraction(5, 4) in fracs
    assert (5, 4) not in semiconvergents("sqrt2", 10)


def test_fewer_events_at_smaller_levels():
    counts = [len(excursions(parse_target("golden"), rho, 2e3)) for rho in (1.0, 0.5, 0.2, 0.05)]
    assert counts == sorted(counts, reverse=True)


def test_depth_height_relation():
    events = excursions(parse_target("golden"), 0.5, 1e5)
    assert events
    for e in events:
        y = horocycle_path("golden", e.t_deepest).imag
        q = e.cusp.q
        assert y == pytest.approx(e.depth_rho / (2 * q * q + e.depth_rho / 2), rel=1e-6)
        if q >= 8:
            assert y == pytest.approx(e.depth_rho / (2 * q * q), rel=0.01)


@pytest.mark.parametrize("alpha", ["sqrt2", "golden"])
def test_first_excursions_are_semiconvergents_and_bounded(alpha):
    rho_seq = [1 / n for n in range(1, 51)]
    apps = approximants(parse_target(alpha), rho_seq, eps=0.01)
    semis = set(semiconvergents(alpha, max(a.q for a in apps)))
    for a in apps:
        assert (a.p, a.q) in semis
        assert a.err < 1.01 * math.pi / (3 * a.q**2)
        assert math.gcd(a.p, a.q) == 1 and a.err > 0


def test_golden_approximants_are_fibonacci_ratios():
    # forward time only reaches fractions below alpha: the odd-indexed ratios
    apps = approximants("golden", [1 / n for n in range(1, 51)])
    fib = [1, 1]
    while fib[-1] < 10**4:
        fib.append(fib[-1] + fib[-2])
    ratios = {(fib[k + 1], fib[k]) for k in range(len(fib) - 1)}
    emitted = {(a.p, a.q) for a in apps}
    assert emitted <= ratios
    assert emitted == {(1, 1), (3, 2), (8, 5)}


def test_convergents_against_hurwitz():
    # every convergent beats 1/q^2; of any three consecutive ones, one beats 1/(sqrt5 q^2)
    for alpha in ("sqrt2", "golden", "pi-3"):
        a = parse_target(alpha)
        with mpmath.workdps(60):
            ratios = [float(abs(a.mpf() - mpmath.mpf(p) / q)) * q * q for p, q in cf_convergents(a, 14)]
        assert max(ratios) < 1
        for k in range(len(ratios) - 2):
            assert min(ratios[k : k + 3]) < 1 / math.sqrt(5)


def test_pi_minus_three_meets_one_eighth():
    # 1/8 lies below pi-3 and is the first cusp reached below rho = 1/50;
    # its error exceeds (1.01) pi / (3 * 64), so the strict check trips
    apps = approximants("pi-3", [1 / 50], strict=False)
    assert (apps[0].p, apps[0].q) == (1, 8)
    assert apps[0].err == pytest.approx(float(mpmath.pi - 3 - mpmath.mpf(1) / 8), rel=1e-12)
    assert apps[0].err > apps[0].err_bound
    with pytest.raises(BoundViolated):
        approximants("pi-3", [1 / 50])


def test_convergent_examples():
    assert cf_convergents("sqrt2", 4) == [(1, 1), (3, 2), (7, 5), (17, 12)]
    assert cf_convergents("golden", 5) == [(1, 1), (2, 1), (3, 2), (5, 3), (8, 5)]
    assert cf_convergents("355/113", 20) == [(3, 1), (22, 7), (355, 113)]
    assert cf_convergents("pi-3", 4) == [(0, 1), (1, 7), (15, 106), (16, 113)]


def test_semiconvergents_include_intermediates():
    assert semiconvergents("sqrt2", 12) == [(1, 1), (2, 1), (3, 2), (4, 3), (7, 5), (10, 7), (17, 12)]
    semis = semiconvergents("pi-3", 120)
    assert (0, 1) in semis and (1, 8) in semis and (16, 113) in semis


def brute_khinchin(alpha: str, Q: int):
    with mpmath.workdps(60):
        a = parse_target(alpha).mpf()
        return [
            (p, q)
            for q in range(2, Q + 1)
            for p in range(int(mpmath.floor(q * a)) - 2, int(mpmath.floor(q * a)) + 3)
            if math.gcd(p, q) == 1 and abs(a - mpmath.mpf(p) / q) < 1 / (q * q * math.log(q))
        ]


def test_khinchin_matches_brute_force():
    for alpha in ("golden", "sqrt2", "pi-3"):
        assert khinchin_hits(alpha, 300) == brute_khinchin(alpha, 300)
    assert khinchin_count("sqrt2", Q_max=2) == len(brute_khinchin("sqrt2", 2))


def test_golden_is_badly_approximable():
    assert khinchin_hits("golden", 10_000) == [(3, 2), (5, 3), (8, 5), (13, 8)]


def test_long_partial_quotients_keep_hitting():
    # partial quotients 2, 20, 200, 2000: each convergent denominator is a new hit
    alpha = "cf:0;2,20,200,2000;(1)"
    counts = [khinchin_count(alpha, Q_max=Q) for Q in (5, 100, 10_000)]
    assert counts == [1, 2, 3]
    assert khinchin_hits(alpha, 10_000) == [(1, 2), (20, 41), (4001, 8202)]
    digits = ["0"] * 130
    for k in (1, 2, 6, 24, 120):
        digits[k - 1] = "1"
    liouville = "0." + "".join(digits)
    assert khinchin_hits(liouville, 1000) == brute_khinchin(liouville, 1000) == [(1, 9), (11, 100)]


def test_scan_direction_and_first_event():
    scan = LevelScan(parse_target("sqrt2"), 0.1, -1)
    ev = scan.first_event(0.3, 1e4)
    assert ev.t_deepest < 0
    assert Fraction(ev.cusp.p, ev.cusp.q) > Fraction(14142, 10000)
