"""Sparse multivariate polynomials over Q keyed by symbol names.

Monomials are tuples of ``(name, exponent)`` pairs sorted by name.  The
monomial order is graded lexicographic with symbols ranked alphabetically
(``"a" > "b"``), which makes leading terms and canonical forms reproducible.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping

Monomial = tuple  # tuple[tuple[str, int], ...]

ONE_MONO: Monomial = ()


class NotDivisible(ArithmeticError):
    pass


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for name, e in b:
        out[name] = out.get(name, 0) + e
    return tuple(sorted(out.items()))


def _mono_div(a: Monomial, b: Monomial) -> Monomial | None:
    """a / b if b divides a, else None."""
    out = dict(a)
    for name, e in b:
        have = out.get(name, 0)
        if have < e:
            return None
        if have == e:
            del out[name]
        else:
            out[name] = have - e
    return tuple(sorted(out.items()))


def _mono_deg(m: Monomial) -> int:
    return sum(e for _, e in m)


def _grlex_key(m: Monomial, names: tuple[str, ...]):
    d = dict(m)
    return (_mono_deg(m), tuple(d.get(n, 0) for n in names))


def _to_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient")


class Poly:
    """Immutable polynomial with rational coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                c = _to_fraction(c)
                if c:
                    clean[m] = c
        self.terms: dict[Monomial, Fraction] = clean
        self._hash = None

    # -- construction -------------------------------------------------
    @classmethod
    def const(cls, c) -> "Poly":
        return cls({ONE_MONO: c})

    @classmethod
    def var(cls, name: str, power: int = 1) -> "Poly":
        if power == 0:
            return cls.const(1)
        return cls({((name, power),): 1})

    @classmethod
    def _raw(cls, terms: dict) -> "Poly":
        p = cls.__new__(cls)
        p.terms = terms
        p._hash = None
        return p

    @staticmethod
    def lift(x) -> "Poly":
        if isinstance(x, Poly):
            return x
        return Poly.const(x)

    # -- inspection ---------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and ONE_MONO in self.terms)

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise ValueError("polynomial is not constant")
        return self.terms.get(ONE_MONO, Fraction(0))

    def variables(self) -> tuple[str, ...]:
        names = set()
        for m in self.terms:
            names.update(n for n, _ in m)
        return tuple(sorted(names))

    def degree(self, var: str | None = None) -> int:
        """Total degree, or degree in ``var``; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        if var is None:
            return max(_mono_deg(m) for m in self.terms)
        return max(dict(m).get(var, 0) for m in self.terms)

    def coeffs_in(self, var: str) -> dict[int, "Poly"]:
        """Split as sum_k c_k(other vars) * var^k."""
        parts: dict[int, dict] = {}
        for m, c in self.terms.items():
            k = 0
            rest = []
            for n, e in m:
                if n == var:
                    k = e
                else:
                    rest.append((n, e))
            parts.setdefault(k, {})[tuple(rest)] = c
        return {k: Poly._raw(t) for k, t in parts.items()}

    def coeff(self, var: str, k: int) -> "Poly":
        return self.coeffs_in(var).get(k, ZERO)

    def leading_term(self, names: tuple[str, ...] | None = None):
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        names = names or self.variables()
        m = max(self.terms, key=lambda mm: _grlex_key(mm, names))
        return m, self.terms[m]

    def leading_coeff(self) -> Fraction:
        return self.leading_term()[1]

    def content(self) -> Fraction:
        """Positive rational c with self/c primitive over Z."""
        from math import gcd, lcm

        if not self.terms:
            return Fraction(0)
        nums = [c.numerator for c in self.terms.values()]
        dens = [c.denominator for c in self.terms.values()]
        g = 0
        for n in nums:
            g = gcd(g, abs(n))
        l = 1
        for d in dens:
            l = lcm(l, d)
        return Fraction(g, l)

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Poly):
            try:
                other = Poly.const(other)
            except TypeError:
                return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Poly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly):
            try:
                other = Poly.const(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            try:
                c = _to_fraction(other)
            except TypeError:
                return NotImplemented
            if not c:
                return ZERO
            return Poly._raw({m: v * c for m, v in self.terms.items()})
        if len(other.terms) < len(self.terms):
            a, b = other, self
        else:
            a, b = self, other
        out: dict = {}
        for ma, ca in a.terms.items():
            for mb, cb in b.terms.items():
                m = _mono_mul(ma, mb)
                v = out.get(m, 0) + ca * cb
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return Poly._raw(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c) -> "Poly":
        return self * c

    def divexact(self, other: "Poly") -> "Poly":
        """Exact quotient; raises NotDivisible if ``other`` does not divide."""
        other = Poly.lift(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if other.is_const():
            inv = 1 / other.const_value()
            return self * inv
        if len(self.terms) > 64:
            names, (a, b) = _to_ring([self, other])
            q, r = a.div(b)
            if r:
                raise NotDivisible("polynomial division leaves a remainder")
            return _from_ring(names, q)
        names = tuple(sorted(set(self.variables()) | set(other.variables())))
        lm_g, lc_g = other.leading_term(names)
        rem = self
        quot: dict = {}
        while rem.terms:
            lm_f, lc_f = rem.leading_term(names)
            m = _mono_div(lm_f, lm_g)
            if m is None:
                raise NotDivisible("polynomial division leaves a remainder")
            c = lc_f / lc_g
            quot[m] = c
            rem = rem - Poly._raw({m: c}) * other
        return Poly._raw(quot)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.terms == other.terms
        try:
            return self.terms == Poly.const(other).terms
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # -- substitution / evaluation -------------------------------------
    def subs(self, values: Mapping[str, object]):
        """Substitute symbols by exact values (numbers, Poly, RatFunc, QuadExt).

        Returns a Poly when every substituted value is a number or Poly,
        otherwise whatever scalar type the arithmetic produces.
        """
        if not values:
            return self
        cache: dict = {}

        def power(name, e):
            key = (name, e)
            if key not in cache:
                cache[key] = values[name] ** e
            return cache[key]

        total = None
        for m, c in self.terms.items():
            term = None
            rest = []
            for n, e in m:
                if n in values:
                    f = power(n, e)
                    term = f if term is None else term * f
                else:
                    rest.append((n, e))
            base = Poly._raw({tuple(rest): c})
            term = base if term is None else term * base
            total = term if total is None else total + term
        return ZERO if total is None else total

    def evaluate(self, values: Mapping[str, object]):
        """Numeric evaluation; every symbol must be supplied."""
        total = 0
        for m, c in self.terms.items():
            t = c
            for n, e in m:
                try:
                    t = t * values[n] ** e
                except KeyError:
                    raise KeyError(f"no value for symbol {n!r}") from None
            total = total + t
        return total

    def rename(self, mapping: Mapping[str, str]) -> "Poly":
        out: dict = {}
        for m, c in self.terms.items():
            d: dict = {}
            for n, e in m:
                n2 = mapping.get(n, n)
                d[n2] = d.get(n2, 0) + e
            key = tuple(sorted(d.items()))
            out[key] = out.get(key, 0) + c
        return Poly(out)

    def diff(self, var: str) -> "Poly":
        out: dict = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(var, 0)
            if not e:
                continue
            if e == 1:
                del d[var]
            else:
                d[var] = e - 1
            key = tuple(sorted(d.items()))
            out[key] = out.get(key, 0) + c * e
        return Poly(out)

    # -- display ------------------------------------------------------
    def sorted_terms(self):
        names = self.variables()
        return sorted(self.terms.items(), key=lambda mc: _grlex_key(mc[0], names), reverse=True)

    def __str__(self):
        from .expr import format_poly

        return format_poly(self)

    def __repr__(self):
        return f"Poly({self})"


ZERO = Poly()
ONE = Poly.const(1)


def poly_sum(items: Iterable[Poly]) -> Poly:
    out = ZERO
    for p in items:
        out = out + p
    return out


# -- sympy bridge for gcd / square-free parts --------------------------------

@lru_cache(maxsize=256)
def _ring(names: tuple[str, ...]):
    from sympy import QQ
    from sympy.polys.rings import ring

    R, *_ = ring(",".join(names) if names else "_dummy", QQ)
    return R


def _to_ring(polys: Iterable[Poly]):
    from sympy import QQ

    polys = list(polys)
    names = tuple(sorted(set().union(*[p.variables() for p in polys]))) or ("_dummy",)
    R = _ring(names)
    index = {n: i for i, n in enumerate(names)}
    elems = []
    for p in polys:
        d = {}
        for m, c in p.terms.items():
            exps = [0] * len(names)
            for n, e in m:
                exps[index[n]] = e
            d[tuple(exps)] = QQ(c.numerator, c.denominator)
        elems.append(R.from_dict(d) if d else R.zero)
    return names, elems


def _from_ring(names, elem) -> Poly:
    out = {}
    for exps, c in elem.items():
        m = tuple((n, e) for n, e in zip(names, exps) if e and n != "_dummy")
        out[m] = Fraction(int(c.numerator), int(c.denominator))
    return Poly(out)


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Monic-content gcd (primitive over Z, positive leading coefficient)."""
    if f.is_zero():
        return g
    if g.is_zero():
        return f
    if f.is_const() or g.is_const():
        return ONE
    names, (a, b) = _to_ring([f, g])
    h = _from_ring(names, a.gcd(b))
    return normalize_sign(primitive(h))


def primitive(p: Poly) -> Poly:
    c = p.content()
    return p if not c else p * (1 / c)


def normalize_sign(p: Poly) -> Poly:
    if p.is_zero():
        return p
    return -p if p.leading_coeff() < 0 else p


def sqf_split(p: Poly) -> tuple[Poly, Poly]:
    """Return (square_root_part, squarefree_part) with p = s**2 * r.

    The rational content is handled too: the integer square-free part of the
    content is kept inside ``r``.
    """
    if p.is_zero():
        return ONE, ZERO
    from sympy import factorint

    names, (a,) = _to_ring([p])
    coeff, factors = a.sqf_list()
    s = ONE
    r = ONE
    for f, mult in factors:
        fp = _from_ring(names, f)
        if mult // 2:
            s = s * fp ** (mult // 2)
        if mult % 2:
            r = r * fp
    c = Fraction(int(coeff.numerator), int(coeff.denominator))
    sign = -1 if c < 0 else 1
    n, d = abs(c.numerator), c.denominator
    # sqrt(n/d) = sqrt(n*d)/d
    nd = n * d
    root, rest = 1, 1
    if nd < 10**24:
        for prime, e in factorint(nd).items():
            root *= prime ** (e // 2)
            rest *= prime ** (e % 2)
    else:
        rest = nd
    s = s * Fraction(root, d)
    r = r * (sign * rest)
    return s, r


def factor_list(p: Poly) -> tuple[Fraction, list[tuple[Poly, int]]]:
    """Irreducible factors over Q, each primitive with positive leading coefficient."""
    if p.is_zero() or p.is_const():
        return (p.const_value() if not p.is_zero() else Fraction(0)), []
    names, (a,) = _to_ring([p])
    coeff, factors = a.factor_list()
    out = []
    c = Fraction(int(coeff.numerator), int(coeff.denominator))
    for f, mult in factors:
        fp = _from_ring(names, f)
        q = normalize_sign(primitive(fp))
        c *= (fp.leading_coeff() / q.leading_coeff()) ** mult
        out.append((q, mult))
    return c, out


def radical(p: Poly) -> Poly:
    """Product of the distinct square-free factors of p (primitive, positive leading coefficient)."""
    if p.is_zero() or p.is_const():
        return p
    names, (a,) = _to_ring([p])
    _, factors = a.sqf_list()
    out = ONE
    for f, _ in factors:
        out = out * _from_ring(names, f)
    return normalize_sign(primitive(out))


def pseudo_rem(f: Poly, g: Poly, var: str) -> Poly:
    """Pseudo-remainder of f by g in ``var`` (lc(g)^k f = q g + r, deg r < deg g)."""
    dg = g.degree(var)
    if dg < 0:
        raise ZeroDivisionError("pseudo-remainder by zero polynomial")
    if dg == 0:
        return ZERO
    lc = g.coeff(var, dg)
    r = f
    while r.degree(var) >= dg:
        dr = r.degree(var)
        lr = r.coeff(var, dr)
        r = r * lc - lr * Poly.var(var, dr - dg) * g
    return r
