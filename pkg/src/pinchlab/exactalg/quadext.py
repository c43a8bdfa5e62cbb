"""Elements a + b*sqrt(r) of a quadratic extension of the rational function field."""

from __future__ import annotations

import cmath
from typing import Mapping

from .poly import ONE, Poly, sqf_split
from .ratfunc import ONE_RF, ZERO_RF, RatFunc


class RadicandMismatch(ValueError):
    pass


class QuadExt:
    """a + b*sqrt(radicand) with a, b rational functions and a polynomial radicand.

    Elements with ``b == 0`` mix freely with any radicand.  The radicand is
    stored as given; use :func:`sqrt_of` to build square roots with the
    square part pulled out.
    """

    __slots__ = ("a", "b", "radicand")

    def __init__(self, a, b=0, radicand: Poly | int = 1):
        self.a = RatFunc.lift(a)
        self.b = RatFunc.lift(b)
        self.radicand = Poly.lift(radicand)

    @staticmethod
    def lift(x, radicand: Poly | None = None) -> "QuadExt":
        if isinstance(x, QuadExt):
            return x
        return QuadExt(x, 0, ONE if radicand is None else radicand)

    def is_rational(self) -> bool:
        return self.b.is_zero()

    def is_zero(self) -> bool:
        return self.a.is_zero() and self.b.is_zero()

    def variables(self) -> tuple[str, ...]:
        names = set(self.a.variables()) | set(self.b.variables())
        if not self.b.is_zero():
            names |= set(self.radicand.variables())
        return tuple(sorted(names))

    def _join(self, other: "QuadExt") -> Poly:
        if self.b.is_zero():
            return other.radicand
        if other.b.is_zero() or self.radicand == other.radicand:
            return self.radicand
        raise RadicandMismatch(f"radicands differ: {self.radicand} vs {other.radicand}")

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        r = self._join(other)
        return QuadExt(self.a + other.a, self.b + other.b, r)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.radicand)

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
        r = self._join(other)
        if self.b.is_zero():
            return QuadExt(self.a * other.a, self.a * other.b, r)
        if other.b.is_zero():
            return QuadExt(self.a * other.a, self.b * other.a, r)
        a = self.a * other.a + self.b * other.b * RatFunc.lift(r)
        b = self.a * other.b + self.b * other.a
        return QuadExt(a, b, r)

    __rmul__ = __mul__

    def conj(self) -> "QuadExt":
        return QuadExt(self.a, -self.b, self.radicand)

    def norm(self) -> RatFunc:
        """(a + b√r)(a − b√r) = a² − b² r."""
        return self.a * self.a - self.b * self.b * RatFunc.lift(self.radicand)

    def trace(self) -> RatFunc:
        return self.a + self.a

    def inverse(self) -> "QuadExt":
        n = self.norm()
        if n.is_zero():
            raise ZeroDivisionError("element of zero norm is not invertible")
        inv = n.inverse()
        return QuadExt(self.a * inv, -self.b * inv, self.radicand)

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.b.is_zero():
            if other.a.is_zero():
                raise ZeroDivisionError("division by zero")
            inv = other.a.inverse()
            return QuadExt(self.a * inv, self.b * inv, self.radicand)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out = QuadExt(ONE_RF, ZERO_RF, self.radicand)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.a != other.a or self.b != other.b:
            return False
        return self.b.is_zero() or self.radicand == other.radicand

    def __hash__(self):
        if self.b.is_zero():
            return hash(self.a)
        return hash((self.a, self.b, self.radicand))

    def __bool__(self):
        return not self.is_zero()

    # -- evaluation ---------------------------------------------------
    def subs(self, values: Mapping[str, object]) -> "QuadExt":
        """Substitute rational values into a, b and the radicand."""
        r = self.radicand.subs(values)
        return QuadExt(self.a.subs(values), self.b.subs(values), r)

    def evaluate(self, values: Mapping[str, object], branch: int = 1) -> complex:
        """Numeric value with sqrt taken on the principal branch, times ``branch``."""
        a = complex(self.a.evaluate(values))
        if self.b.is_zero():
            return a
        b = complex(self.b.evaluate(values))
        r = complex(self.radicand.evaluate(values))
        return a + branch * b * cmath.sqrt(r)

    def branches(self) -> tuple["QuadExt", "QuadExt"]:
        return self, self.conj()

    def __str__(self):
        from .expr import format_quadext

        return format_quadext(self)

    def __repr__(self):
        return f"QuadExt({self})"


def _coerce(x):
    if isinstance(x, QuadExt):
        return x
    try:
        return QuadExt(RatFunc.lift(x), ZERO_RF, ONE)
    except TypeError:
        return NotImplemented


def sqrt_of(p) -> QuadExt:
    """sqrt(p) as 0 + s*sqrt(r) with p = s² r and r square-free.

    A perfect square still returns a QuadExt with radicand 1 so the sign
    choice stays visible to callers.
    """
    p = RatFunc.lift(p)
    if not p.den.is_const():
        # sqrt(n/d) = sqrt(n d)/d
        inner = p.num * p.den
        s, r = sqf_split(inner)
        return QuadExt(ZERO_RF, RatFunc(s, p.den), r)
    c = p.den.const_value()
    s, r = sqf_split(p.num * (1 / c))
    return QuadExt(ZERO_RF, RatFunc.lift(s), r)
