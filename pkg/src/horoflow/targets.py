"""Tangency points of lifted horocycles: exact and high-precision real numbers.

Continued-fraction work needs more than a float, so targets come in three
flavours:

* :class:`QuadraticSurd` -- ``(a + b*sqrt(d)) / c`` with integer data, exact
  partial quotients forever;
* :class:`DecimalTarget` -- a decimal string, read as the interval
  ``value +- 10**-digits``; partial quotients are emitted while the interval
  certifies them;
* :class:`RationalTarget` -- an exact fraction (cusps, periodic horocycles).

:func:`parse_target` understands named constants (``golden``, ``sqrt2``,
``pi-3``...), ``sqrt(d)``, ``(a+sqrt(d))/c``, ``p/q``, decimals, and
eventually periodic continued fractions written ``cf:a0;a1,a2,...;(b1,b2,...)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import PrecisionExhausted

MP_DPS = 80
_NAMED_DECIMALS = {
    "pi": lambda: mpmath.pi,
    "pi-3": lambda: mpmath.pi - 3,
    "e": lambda: mpmath.e,
    "e-2": lambda: mpmath.e - 2,
}


def _mp(x):
    with mpmath.workdps(MP_DPS):
        return mpmath.mpf(x)


@dataclass(frozen=True)
class QuadraticSurd:
    """The real number ``(a + b*sqrt(d)) / c``; ``d > 0`` is not a perfect square."""

    a: int
    b: int
    d: int
    c: int
    label: str = ""

    def __post_init__(self):
        if self.c == 0:
            raise ValueError("zero denominator")
        if self.d <= 0 or math.isqrt(self.d) ** 2 == self.d:
            raise ValueError(f"d={self.d} must be a positive non-square")
        if self.b == 0:
            raise ValueError("b = 0 gives a rational; use RationalTarget")

    is_rational = False

    @property
    def value(self) -> float:
        return float(self.mpf())

    def mpf(self):
        with mpmath.workdps(MP_DPS):
            return (self.a + self.b * mpmath.sqrt(self.d)) / self.c

    def partial_quotients(self, n: int) -> list[int]:
        # rewrite as (P + sqrt(D)) / Q with Q | D - P^2
        s = 1 if self.b > 0 else -1
        P, D, Q = s * self.a, self.b * self.b * self.d, s * self.c
        if (D - P * P) % Q:
            P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
        r = math.isqrt(D)
        out = []
        for _ in range(n):
            if Q > 0:
                q = (P + r) // Q
            else:
                q = -((P + r) // -Q) - 1
            out.append(q)
            P = q * Q - P
            Q = (D - P * P) // Q
        return out

    def __str__(self):
        return self.label or f"({self.a}+{self.b}*sqrt({self.d}))/{self.c}"


@dataclass(frozen=True)
class DecimalTarget:
    """A decimal string known to ``+- 10**-digits``."""

    text: str
    label: str = ""

    is_rational = False

    @property
    def digits(self) -> int:
        frac = self.text.split(".", 1)
        return len(frac[1]) if len(frac) == 2 else 0

    @property
    def value(self) -> float:
        return float(self.text)

    def fraction(self) -> Fraction:
        return Fraction(self.text)

    def mpf(self):
        return _mp(self.text)

    def partial_quotients(self, n: int) -> list[int]:
        centre = self.fraction()
        half = Fraction(1, 10 ** self.digits)
        lo, hi = centre - half, centre + half
        out = []
        for _ in range(n):
            a = math.floor(lo)
            if math.floor(hi) != a or lo == a:
                raise PrecisionExhausted(
                    f"{self.digits}-digit decimal certifies only {len(out)} partial quotients"
                )
            out.append(a)
            lo, hi = 1 / (hi - a), 1 / (lo - a)
        return out

    def __str__(self):
        return self.label or self.text


@dataclass(frozen=True)
class RationalTarget:
    value_exact: Fraction
    label: str = ""

    is_rational = True

    @property
    def value(self) -> float:
        return float(self.value_exact)

    def mpf(self):
        with mpmath.workdps(MP_DPS):
            return mpmath.mpf(self.value_exact.numerator) / self.value_exact.denominator

    def partial_quotients(self, n: int) -> list[int]:
        out = []
        x = self.value_exact
        while len(out) < n:
            a = math.floor(x)
            out.append(a)
            if x == a:
                break
            x = 1 / (x - a)
        return out

    def __str__(self):
        return self.label or str(self.value_exact)


Target = QuadraticSurd | DecimalTarget | RationalTarget


def _surd_from_periodic_cf(prefix: list[int], period: list[int], label: str) -> QuadraticSurd:
    # purely periodic tail beta = [b1; b2, ..., bm, beta]
    P1, P0, Q1, Q0 = 1, 0, 0, 1
    for b in period:
        P1, P0 = b * P1 + P0, P1
        Q1, Q0 = b * Q1 + Q0, Q1
    # beta = (P1 beta + P0) / (Q1 beta + Q0)  ->  Q1 beta^2 + (Q0 - P1) beta - P0 = 0
    u, disc, v = P1 - Q0, (Q0 - P1) ** 2 + 4 * Q1 * P0, 2 * Q1  # beta = (u + sqrt(disc)) / v
    # alpha = [prefix..., beta] = (pk beta + pk1) / (qk beta + qk1)
    pk, pk1, qk, qk1 = 1, 0, 0, 1
    for a in prefix:
        pk, pk1 = a * pk + pk1, pk
        qk, qk1 = a * qk + qk1, qk
    X, Y = pk * u + pk1 * v, qk * u + qk1 * v
    num_a, num_b, den = X * Y - pk * qk * disc, pk * Y - qk * X, Y * Y - qk * qk * disc
    g = math.gcd(math.gcd(num_a, num_b), den)
    return QuadraticSurd(num_a // g, num_b // g, disc, den // g, label=label)


def from_partial_quotients(prefix: list[int], period: list[int], label: str = "") -> QuadraticSurd:
    """Exact quadratic irrational ``[prefix; period, period, ...]``."""
    if not period or any(b < 1 for b in period) or any(a < 1 for a in prefix[1:]):
        raise ValueError("partial quotients after the first must be positive and the period nonempty")
    if not prefix:
        return _surd_from_periodic_cf([], period, label)
    return _surd_from_periodic_cf(prefix, period, label)


_SURD_RE = re.compile(r"^\(?\s*([+-]?\d+)?\s*([+-])\s*(\d*)\*?sqrt\(?(\d+)\)?\s*\)?\s*(?:/\s*(\d+))?$")
_SQRT_RE = re.compile(r"^sqrt\(?(\d+)\)?$")
_CF_RE = re.compile(r"^cf:\s*\[?([^\]]*)\]?$")


def parse_target(text) -> Target:
    """Parse the textual alpha forms accepted throughout the package.

    A bare Python float is rejected: it carries no information beyond its
    53 bits and cannot drive continued-fraction work.
    """
    if isinstance(text, (QuadraticSurd, DecimalTarget, RationalTarget)):
        return text
    if isinstance(text, Fraction) or isinstance(text, int):
        return RationalTarget(Fraction(text))
    if isinstance(text, float):
        raise TypeError("float alpha is ambiguous; pass a decimal string, a surd or a Fraction")
    s = str(text).strip().lower().replace(" ", "")
    if s in ("golden", "phi", "goldenratio"):
        return QuadraticSurd(1, 1, 5, 2, label="golden")
    if s in _NAMED_DECIMALS:
        k = MP_DPS - 5
        with mpmath.workdps(MP_DPS + 10):
            scaled = int(mpmath.floor(_NAMED_DECIMALS[s]() * mpmath.mpf(10) ** k))
        # truncation error is below 10**-k, inside the interval DecimalTarget assumes
        sign = "-" if scaled < 0 else ""
        whole, frac = divmod(abs(scaled), 10**k)
        return DecimalTarget(f"{sign}{whole}.{frac:0{k}d}", label=s)
    m = re.fullmatch(r"sqrt(\d+)", s) or _SQRT_RE.match(s)
    if m:
        d = int(m.group(1))
        r = math.isqrt(d)
        if r * r == d:
            return RationalTarget(Fraction(r))
        return QuadraticSurd(0, 1, d, 1, label=s)
    m = _CF_RE.match(s)
    if m:
        parts = m.group(1).split(";")
        if len(parts) < 2:
            raise ValueError(f"continued fraction {text!r} needs 'a0;a1,...;(period)'")
        a0 = int(parts[0])
        body_txt = "" if parts[1].strip().startswith("(") else parts[1]
        period_txt = parts[1] if not body_txt else (parts[2] if len(parts) >= 3 else "")
        body = [int(v) for v in body_txt.split(",") if v.strip()]
        period = [int(v) for v in period_txt.strip().strip("()").split(",") if v.strip()]
        if not period:
            return RationalTarget(_finite_cf_value([a0, *body]), label=s)
        return from_partial_quotients([a0, *body], period, label=s)
    m = _SURD_RE.match(s)
    if m and "sqrt" in s:
        a = int(m.group(1) or 0)
        b = int(m.group(3) or 1) * (1 if m.group(2) == "+" else -1)
        d = int(m.group(4))
        c = int(m.group(5) or 1)
        return QuadraticSurd(a, b, d, c, label=s)
    if re.fullmatch(r"[+-]?\d+/\d+", s):
        return RationalTarget(Fraction(s))
    if re.fullmatch(r"[+-]?\d+(\.\d+)?", s):
        if "." not in s:
            return RationalTarget(Fraction(int(s)))
        return DecimalTarget(s)
    raise ValueError(f"cannot parse alpha {text!r}")


def _finite_cf_value(coeffs: list[int]) -> Fraction:
    x = Fraction(coeffs[-1])
    for a in reversed(coeffs[:-1]):
        x = a + 1 / x
    return x


def alpha_value(alpha) -> float:
    """Float value of a target, or the float itself."""
    if isinstance(alpha, (int, float)):
        return float(alpha)
    return parse_target(alpha).value


def linear_form(alpha, p: int, q: int) -> float:
    """``q*alpha - p`` evaluated at high precision when alpha is a target."""
    if isinstance(alpha, float):
        return q * alpha - p
    t = parse_target(alpha)
    with mpmath.workdps(MP_DPS):
        return float(q * t.mpf() - p)
