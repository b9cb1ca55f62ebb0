from fractions import Fraction

import mpmath
import pytest

from horoflow.errors import PrecisionExhausted
from horoflow.targets import (
    DecimalTarget,
    QuadraticSurd,
    RationalTarget,
    alpha_value,
    from_partial_quotients,
    linear_form,
    parse_target,
)


def test_named_surds():
    g = parse_target("golden")
    assert isinstance(g, QuadraticSurd)
    assert g.value == pytest.approx((1 + 5**0.5) / 2, rel=1e-15)
    assert g.partial_quotients(12) == [1] * 12
    assert parse_target("sqrt2").partial_quotients(6) == [1, 2, 2, 2, 2, 2]
    assert parse_target("sqrt(7)").partial_quotients(9) == [2, 1, 1, 1, 4, 1, 1, 1, 4]
    assert parse_target("(1+sqrt(5))/2").partial_quotients(8) == [1] * 8


def test_surd_quotients_agree_with_high_precision():
    s = parse_target("(3-2*sqrt(13))/5")
    coeffs = []
    with mpmath.workdps(200):
        x = mpmath.mpf(3 - 2 * mpmath.sqrt(13)) / 5
        for _ in range(40):
            a = int(mpmath.floor(x))
            coeffs.append(a)
            x = 1 / (x - a)
    assert s.partial_quotients(40) == coeffs


def test_periodic_cf_round_trip():
    t = from_partial_quotients([0, 1, 1, 1, 1, 1, 1, 250], [1])
    assert t.partial_quotients(12) == [0, 1, 1, 1, 1, 1, 1, 250, 1, 1, 1, 1]
    assert parse_target("cf:0;1,1,1,1,1,1,250;(1)").value == pytest.approx(t.value, rel=1e-15)
    assert parse_target("cf:1;(2)").value == pytest.approx(2**0.5, rel=1e-15)


def test_decimals_certify_then_stop():
    d = parse_target("pi-3")
    assert isinstance(d, DecimalTarget)
    assert d.partial_quotients(5) == [0, 7, 15, 1, 292]
    short = DecimalTarget("3.14159")
    with pytest.raises(PrecisionExhausted):
        short.partial_quotients(20)
    assert parse_target("e").partial_quotients(10) == [2, 1, 2, 1, 1, 4, 1, 1, 6, 1]


def test_rationals_terminate():
    r = parse_target("355/113")
    assert isinstance(r, RationalTarget)
    assert r.partial_quotients(50) == [3, 7, 16]
    assert parse_target(Fraction(1, 3)).value == pytest.approx(1 / 3)


def test_floats_rejected_and_garbage():
    with pytest.raises(TypeError):
        parse_target(1.4142)
    with pytest.raises(ValueError):
        parse_target("sqrt(-2)x")


def test_linear_form_and_value():
    assert linear_form("sqrt2", 7, 5) == pytest.approx(5 * 2**0.5 - 7, rel=1e-12)
    assert alpha_value(0.25) == 0.25
    assert alpha_value("golden") == pytest.approx(1.618033988749895)
