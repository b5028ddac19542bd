"""Exact arithmetic in cyclotomic fields Q(zeta_m).

An element is stored as its power-basis coefficient vector over
``1, zeta_m, ..., zeta_m**(m-1)``, reduced modulo the m-th cyclotomic
polynomial so that equal elements have equal vectors (for a fixed order).
Elements of different orders are compared after lifting both to the lcm.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence, Union

Rational = Fraction
Number = Union[int, Fraction]


def as_fraction(x) -> Fraction:
    """Parse ints, Fractions and strings like ``"3/2"`` into a reduced Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def _poly_divmod(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    # integer polynomials, low degree first, den monic
    num = list(num)
    q = [0] * max(len(num) - len(den) + 1, 1)
    for shift in range(len(num) - len(den), -1, -1):
        c = num[shift + len(den) - 1]
        if c:
            q[shift] = c
            for k, d in enumerate(den):
                num[shift + k] -= c * d
    return q, num[: len(den) - 1]


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple[int, ...]:
    """Coefficients of Phi_m, lowest degree first."""
    if m < 1:
        raise ValueError("order must be positive")
    poly = [-1] + [0] * (m - 1) + [1]  # x^m - 1
    for d in range(1, m):
        if m % d == 0:
            poly, rem = _poly_divmod(poly, list(cyclotomic_polynomial(d)))
            assert not any(rem)
    return tuple(poly)


def euler_phi(m: int) -> int:
    return len(cyclotomic_polynomial(m)) - 1


def _reduce(vec: list[Fraction], m: int) -> tuple[Fraction, ...]:
    """Reduce a length-m vector (element of Q[x]/(x^m-1)) modulo Phi_m."""
    phi = cyclotomic_polynomial(m)
    deg = len(phi) - 1
    v = list(vec)
    for top in range(len(v) - 1, deg - 1, -1):
        c = v[top]
        if c:
            base = top - deg
            for k, p in enumerate(phi):
                v[base + k] -= c * p
    return tuple(v[:deg]) + (Fraction(0),) * (m - deg)


class Cyclo:
    """An element of the m-th cyclotomic field, immutable."""

    __slots__ = ("order", "coords", "__dict__")

    def __init__(self, order: int, coords: Iterable[Number] = (), *, _reduced: bool = False):
        if order < 1:
            raise ValueError("cyclotomic order must be positive")
        vec = [as_fraction(c) for c in coords]
        if len(vec) > order:
            # fold exponents >= m using zeta^m = 1
            folded = [Fraction(0)] * order
            for k, c in enumerate(vec):
                folded[k % order] += c
            vec = folded
        vec += [Fraction(0)] * (order - len(vec))
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coords", tuple(vec) if _reduced else _reduce(vec, order))

    def __setattr__(self, name, value):
        if name in ("order", "coords"):
            raise AttributeError("Cyclo is immutable")
        object.__setattr__(self, name, value)

    # constructors -------------------------------------------------------
    @classmethod
    def rational(cls, x: Number, order: int = 1) -> "Cyclo":
        return cls(order, [as_fraction(x)])

    @classmethod
    def root_of_unity(cls, order: int, k: int = 1) -> "Cyclo":
        """zeta_order ** k."""
        vec = [Fraction(0)] * order
        vec[k % order] = Fraction(1)
        return cls(order, vec)

    # conversions ----------------------------------------------------------
    def lift(self, order: int) -> "Cyclo":
        if order == self.order:
            return self
        if order % self.order:
            raise ValueError(f"cannot lift Q(zeta_{self.order}) into Q(zeta_{order})")
        step = order // self.order
        vec = [Fraction(0)] * order
        for k, c in enumerate(self.coords):
            vec[k * step] = c
        return Cyclo(order, vec)

    @cached_property
    def value(self) -> complex:
        z = cmath.exp(2j * math.pi / self.order)
        return complex(sum(float(c) * z**k for k, c in enumerate(self.coords) if c))

    def __complex__(self) -> complex:
        return self.value

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_rational(self) -> bool:
        return not any(self.coords[1:])

    def conjugate(self) -> "Cyclo":
        m = self.order
        vec = [Fraction(0)] * m
        for k, c in enumerate(self.coords):
            vec[(-k) % m] += c
        return Cyclo(m, vec)

    @cached_property
    def arg_turns(self) -> Fraction | None:
        """arg(self)/(2*pi) in [0, 1) exactly, when self is a positive real
        multiple of a root of unity; otherwise None."""
        if self.is_zero():
            return None
        m = self.order
        big = m if m % 2 == 0 else 2 * m
        x = self.lift(big)
        xbar = x.conjugate()
        # c / conj(c) = exp(2 i arg c) must be a root of unity of the field
        for b in range(big):
            if x == xbar * Cyclo.root_of_unity(big, b):
                approx = (cmath.phase(self.value) / (2 * math.pi)) % 1.0
                candidates = [Fraction(b, 2 * big), Fraction(b, 2 * big) + Fraction(1, 2)]
                return min(candidates, key=lambda t: min(abs(float(t) - approx), 1 - abs(float(t) - approx)))
        return None

    # arithmetic -----------------------------------------------------------
    def _common(self, other) -> tuple["Cyclo", "Cyclo"]:
        if not isinstance(other, Cyclo):
            other = Cyclo.rational(as_fraction(other), 1)
        if other.order == self.order:
            return self, other
        m = math.lcm(self.order, other.order)
        return self.lift(m), other.lift(m)

    def __add__(self, other):
        if isinstance(other, (complex, float)):
            return NotImplemented
        a, b = self._common(other)
        return Cyclo(a.order, [x + y for x, y in zip(a.coords, b.coords)], _reduced=True)

    __radd__ = __add__

    def __neg__(self):
        return Cyclo(self.order, [-c for c in self.coords], _reduced=True)

    def __sub__(self, other):
        if isinstance(other, (complex, float)):
            return NotImplemented
        return self + (-self._common(other)[1])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (complex, float)):
            return NotImplemented
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            return Cyclo(self.order, [c * f for c in self.coords], _reduced=True)
        a, b = self._common(other)
        m = a.order
        vec = [Fraction(0)] * m
        nz = [(k, c) for k, c in enumerate(b.coords) if c]
        for i, x in enumerate(a.coords):
            if x:
                for k, c in nz:
                    vec[(i + k) % m] += x * c
        return Cyclo(m, vec)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Cyclo.rational(other)
        if not isinstance(other, Cyclo):
            return NotImplemented
        a, b = self._common(other)
        return a.coords == b.coords

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        terms = []
        for k, c in enumerate(self.coords):
            if c:
                terms.append(str(c) if k == 0 else f"{c}*z{self.order}^{k}")
        return " + ".join(terms) if terms else "0"

    def to_json(self) -> dict:
        return {"cyclo_order": self.order, "coords": [str(c) for c in self.coords]}

    @classmethod
    def from_json(cls, data: dict) -> "Cyclo":
        return cls(int(data["cyclo_order"]), [as_fraction(c) for c in data["coords"]])


def coords_sum(values: Sequence[Cyclo]) -> Cyclo:
    total = Cyclo.rational(0)
    for v in values:
        total = total + v
    return total
