"""Rational functions num/den over Q in named symbols, kept in canonical form."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .poly import ONE, ZERO, NotDivisible, Poly, poly_gcd


class RatFunc:
    """Canonical quotient: gcd(num, den) = 1 and den has leading coefficient 1."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, *, _canonical: bool = False):
        num = _as_poly(num)
        den = ONE if den is None else _as_poly(den)
        if den.is_zero():
            raise ZeroDivisionError("RatFunc with zero denominator")
        if not _canonical:
            num, den = _canonicalize(num, den)
        self.num: Poly = num
        self.den: Poly = den

    @classmethod
    def var(cls, name: str) -> "RatFunc":
        return cls(Poly.var(name), _canonical=True)

    @classmethod
    def const(cls, c) -> "RatFunc":
        return cls(Poly.const(c), _canonical=True)

    @staticmethod
    def lift(x) -> "RatFunc":
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, Poly):
            return RatFunc(x, _canonical=True)
        return RatFunc(Poly.const(Fraction(x)), _canonical=True)

    # -- predicates ---------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def is_poly(self) -> bool:
        return self.den.is_const()

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise ValueError("rational function is not constant")
        return self.num.const_value() / self.den.const_value()

    def as_poly(self) -> Poly:
        if not self.den.is_const():
            raise NotDivisible("rational function has a non-constant denominator")
        return self.num * (1 / self.den.const_value())

    def variables(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.num.variables()) | set(self.den.variables())))

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, _canonical=True)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.num.is_zero() or other.num.is_zero():
            return ZERO_RF
        if self.den.is_const() and other.den.is_const():
            return RatFunc(self.num * other.num, ONE, _canonical=True)
        # cross-cancel before multiplying keeps intermediate sizes down
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        n = self.num.divexact(g1) * other.num.divexact(g2)
        d = self.den.divexact(g2) * other.den.divexact(g1)
        # both factors were reduced, so after cross-cancelling the product is too
        return RatFunc(*_monic_den(n, d), _canonical=True)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        return RatFunc(self.num**n, self.den**n, _canonical=True)

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self):
        return not self.num.is_zero()

    # -- substitution -------------------------------------------------
    def subs(self, values: Mapping[str, object]):
        n = self.num.subs(values)
        d = self.den.subs(values)
        if isinstance(d, Poly) and d.is_zero():
            raise ZeroDivisionError("denominator vanishes under substitution")
        if isinstance(n, Poly) and isinstance(d, Poly):
            return RatFunc(n, d)
        return n / d if not isinstance(n, Poly) else RatFunc.lift(n) / d

    def evaluate(self, values: Mapping[str, object]):
        d = self.den.evaluate(values)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at the evaluation point")
        return self.num.evaluate(values) / d

    def __str__(self):
        from .expr import format_ratfunc

        return format_ratfunc(self)

    def __repr__(self):
        return f"RatFunc({self})"


def _as_poly(x) -> Poly:
    if isinstance(x, Poly):
        return x
    if isinstance(x, RatFunc):
        return x.as_poly()
    return Poly.const(Fraction(x))


def _coerce(x):
    if isinstance(x, RatFunc):
        return x
    if isinstance(x, Poly):
        return RatFunc(x, _canonical=True)
    try:
        return RatFunc(Poly.const(Fraction(x)), _canonical=True)
    except TypeError:
        return NotImplemented


def _monic_den(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    lc = den.leading_coeff()
    if lc != 1:
        inv = 1 / lc
        return num * inv, den * inv
    return num, den


def _canonicalize(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    if num.is_zero():
        return ZERO, ONE
    if not den.is_const():
        g = poly_gcd(num, den)
        if not g.is_const():
            num = num.divexact(g)
            den = den.divexact(g)
    lc = den.leading_coeff()
    if lc != 1:
        inv = 1 / lc
        num = num * inv
        den = den * inv
    return num, den


ZERO_RF = RatFunc(ZERO, ONE, _canonical=True)
ONE_RF = RatFunc(ONE, ONE, _canonical=True)
