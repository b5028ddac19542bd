"""Ramified exponents ``q = sum a_e z^(-e)`` and their Galois orbits.

Coefficients are exact cyclotomic numbers (:class:`~twistfission.cyclo.Cyclo`)
unless a plain ``complex`` is supplied, in which case the exponent is in
numeric mode and all equality tests use :data:`NUMERIC_TOL`.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Union

from .cyclo import Cyclo, as_fraction

Coeff = Union[Cyclo, complex]

NUMERIC_TOL = 1e-9
ANGLE_TOL = 1e-9


class ExponentError(ValueError):
    """Raised for malformed exponents (constant or holomorphic terms)."""


# -- coefficients -------------------------------------------------------------

def as_coeff(c) -> Coeff:
    if isinstance(c, Cyclo):
        return c
    if isinstance(c, (complex, float)):
        return complex(c)
    if isinstance(c, Mapping):
        if "cyclo_order" in c:
            return Cyclo.from_json(c)
        return complex(float(c.get("re", 0.0)), float(c.get("im", 0.0)))
    return Cyclo.rational(as_fraction(c))


def coeff_is_zero(c: Coeff) -> bool:
    if isinstance(c, Cyclo):
        return c.is_zero()
    return abs(c) < NUMERIC_TOL


def coeff_eq(a: Coeff, b: Coeff) -> bool:
    if isinstance(a, Cyclo) and isinstance(b, Cyclo):
        return a == b
    return abs(complex(a) - complex(b)) < NUMERIC_TOL


def _combine(a: Coeff, b: Coeff, op) -> Coeff:
    if isinstance(a, Cyclo) and isinstance(b, Cyclo):
        return op(a, b)
    return op(complex(a), complex(b))


def root_of_unity(order: int, k: int, numeric: bool) -> Coeff:
    if numeric:
        return cmath.exp(2j * math.pi * k / order)
    return Cyclo.root_of_unity(order, k)


def arg_turns(c: Coeff) -> tuple[Fraction | float, bool]:
    """Argument of ``c`` in turns, in [0, 1), and whether it is exact."""
    if isinstance(c, Cyclo):
        t = c.arg_turns
        if t is not None:
            return t, True
        c = c.value
    t = (cmath.phase(c) / (2 * math.pi)) % 1.0
    return (0.0 if t >= 1.0 - 1e-15 else t), False


def coeff_to_json(c: Coeff) -> dict:
    if isinstance(c, Cyclo):
        return c.to_json()
    return {"re": c.real, "im": c.imag}


# -- exponents ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Exponent:
    """Canonical ramified exponent; ``terms`` sorted by decreasing pole order."""

    terms: tuple[tuple[Fraction, Coeff], ...] = ()

    @property
    def numeric(self) -> bool:
        return any(not isinstance(c, Cyclo) for _, c in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def leading(self) -> tuple[Fraction, Coeff]:
        if not self.terms:
            raise ExponentError("the zero exponent has no leading term")
        return self.terms[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Exponent):
            return NotImplemented
        if len(self.terms) != len(other.terms):
            return False
        return all(e1 == e2 and coeff_eq(c1, c2)
                   for (e1, c1), (e2, c2) in zip(self.terms, other.terms))

    __hash__ = None  # type: ignore[assignment]

    def __neg__(self) -> "Exponent":
        return Exponent(tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: "Exponent") -> "Exponent":
        return difference(self, other)

    def __add__(self, other: "Exponent") -> "Exponent":
        return normalize(list(self.terms) + list(other.terms))

    def evaluate(self, radius: float, turns: float) -> complex:
        """Principal determination at ``z = radius * exp(2 pi i turns)``."""
        return sum(complex(c) * radius ** (-float(e)) * cmath.exp(-2j * math.pi * float(e) * turns)
                   for e, c in self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({c!r})*z^(-{e})" for e, c in self.terms)

    def to_json(self) -> dict:
        return {"terms": [{"exp": str(e), "coeff": coeff_to_json(c)} for e, c in self.terms]}

    @classmethod
    def from_json(cls, data: Mapping) -> "Exponent":
        return normalize([(t["exp"], t["coeff"]) for t in data.get("terms", [])])


def normalize(raw: Iterable | Mapping) -> Exponent:
    """Canonicalize a raw term list ``[(exp, coeff), ...]`` (or a mapping).

    Repeated exponents are summed; zero coefficients dropped.  A nonzero
    coefficient on a nonpositive exponent is rejected.
    """
    items = raw.items() if isinstance(raw, Mapping) else raw
    acc: dict[Fraction, Coeff] = {}
    for e, c in items:
        e = as_fraction(e)
        c = as_coeff(c)
        acc[e] = _combine(acc[e], c, lambda a, b: a + b) if e in acc else c
    terms = []
    for e in sorted(acc, reverse=True):
        c = acc[e]
        if coeff_is_zero(c):
            continue
        if e <= 0:
            raise ExponentError(f"term z^({-e}) is not polar: exponents must have constant term zero")
        terms.append((e, c))
    return Exponent(tuple(terms))


def ramification(q: Exponent) -> int:
    return math.lcm(1, *(e.denominator for e, _ in q.terms))


def degree_level(q: Exponent) -> tuple[int, Fraction]:
    if q.is_zero():
        return 0, Fraction(0)
    r = ramification(q)
    top = q.terms[0][0]
    deg = top * r
    assert deg.denominator == 1
    return int(deg), Fraction(int(deg), r)


def level(q: Exponent) -> Fraction:
    return q.terms[0][0] if q.terms else Fraction(0)


def branch(q: Exponent, j: int, r: int | None = None) -> Exponent:
    """The j-th analytic continuation of ``q`` (j positive turns)."""
    r = ramification(q) if r is None else r
    numeric = q.numeric
    terms = []
    for e, c in q.terms:
        k = e * r
        assert k.denominator == 1, "r must be a multiple of ram(q)"
        terms.append((e, _combine(c, root_of_unity(r, -int(k) * j, numeric), lambda a, b: a * b)))
    return Exponent(tuple(terms))


def galois_orbit(q: Exponent) -> list[Exponent]:
    r = ramification(q)
    orbit: list[Exponent] = []
    for j in range(r):
        b = branch(q, j, r)
        if not any(b == o for o in orbit):
            orbit.append(b)
    assert len(orbit) == r
    return orbit


def same_circle(q1: Exponent, q2: Exponent) -> bool:
    if ramification(q1) != ramification(q2) or len(q1.terms) != len(q2.terms):
        return False
    return any(q2 == b for b in galois_orbit(q1))


def difference(q1: Exponent, q2: Exponent) -> Exponent:
    return normalize(list(q1.terms) + [(e, _combine(c, Cyclo.rational(-1), lambda a, b: a * b))
                                       for e, c in q2.terms])


# -- circles and directions -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class CircleClass:
    """A Galois orbit <q>: a covering circle of the boundary circle."""

    representative: Exponent

    @cached_property
    def ram(self) -> int:
        return ramification(self.representative)

    @cached_property
    def deg(self) -> int:
        return degree_level(self.representative)[0]

    @cached_property
    def level(self) -> Fraction:
        return degree_level(self.representative)[1]

    @property
    def numeric(self) -> bool:
        return self.representative.numeric

    def is_zero(self) -> bool:
        return self.representative.is_zero()

    def orbit(self) -> list[Exponent]:
        return galois_orbit(self.representative)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CircleClass):
            return NotImplemented
        return same_circle(self.representative, other.representative)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"<{self.representative!r}>"


@dataclass(frozen=True)
class Direction:
    """A direction on the base circle, stored in turns (fractions of 2 pi).

    ``sheet`` is the sheet index of an apple on a covering circle (0 for
    plain base directions); ``cover_turns`` keeps the angle upstairs.
    """

    turns: Fraction | float
    exact: bool
    sheet: int = 0
    cover_turns: Fraction | float | None = None

    @property
    def angle(self) -> float:
        return 2 * math.pi * float(self.turns)

    def same_base(self, other: "Direction") -> bool:
        if self.exact and other.exact:
            return self.turns == other.turns
        diff = abs(float(self.turns) - float(other.turns)) % 1.0
        return min(diff, 1.0 - diff) * 2 * math.pi < ANGLE_TOL

    def turns_json(self):
        return str(Fraction(self.turns)) if self.exact else float(self.turns)


def decay_turns(coeff: Coeff, e: Fraction, span: int = 1) -> list[tuple[Fraction | float, bool]]:
    """Turns ``t`` in [0, span) where ``coeff * exp(-2 pi i e t)`` is real negative.

    These are the points of maximal decay of ``coeff * z^(-e)`` on the
    ``span``-fold cover (principal determination of ``z^(-e)``).
    """
    a, exact = arg_turns(coeff)
    out = []
    if exact:
        c0 = a - Fraction(1, 2)
        m_hi = math.floor(c0)
        m_lo = math.floor(c0 - e * span)  # exclusive
        for m in range(m_hi, m_lo, -1):
            t = (c0 - m) / e
            if 0 <= t < span:
                out.append((t, True))
    else:
        c0 = a - 0.5
        ef = float(e)
        m_hi = math.floor(c0 + 1e-12)
        m_lo = math.floor(c0 - ef * span + 1e-12)
        for m in range(m_hi, m_lo, -1):
            t = (c0 - m) / ef
            if t >= span - 1e-12:
                t -= span
            if t < 0:
                t = 0.0 if t > -1e-12 else t + span
            out.append((t, False))
    return sorted(out, key=lambda p: float(p[0]))


def apples(circle: CircleClass | Exponent) -> list[Direction]:
    """Points of maximal decay on a covering circle, from the leading term."""
    if isinstance(circle, Exponent):
        circle = CircleClass(circle)
    if circle.is_zero():
        raise ExponentError("the circle <0> carries no apples")
    e, a = circle.representative.leading
    r = circle.ram
    result = []
    for t, exact in decay_turns(a, e, span=r):
        sheet = int(math.floor(float(t)))
        base = t - sheet
        result.append(Direction(base, exact, sheet=sheet, cover_turns=t))
    assert len(result) == circle.deg
    return result
