"""Minimal infix grammar for exact expressions.

Grammar: symbols (identifiers), integer or decimal literals, ``+ - * /``,
``^`` (integer exponents) and ``sqrt(...)``.  Output of the formatters
re-parses to an equal canonical value.
"""

from __future__ import annotations

import ast
from fractions import Fraction
from typing import Iterable

from ..errors import ExpressionSyntaxError, SymbolError
from .poly import Poly
from .quadext import QuadExt, sqrt_of
from .ratfunc import RatFunc


def parse_expr(text: str, symbols: Iterable[str] | None = None):
    """Parse ``text`` into a RatFunc (or QuadExt when sqrt appears).

    When ``symbols`` is given, any other identifier raises SymbolError.
    """
    if not isinstance(text, str):
        return RatFunc.lift(Fraction(text))
    allowed = None if symbols is None else set(symbols)
    try:
        tree = ast.parse(text.replace("^", "**").strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionSyntaxError(f"cannot parse {text!r}: {exc.msg}") from None
    return _walk(tree.body, allowed, text)


def _walk(node, allowed, text):
    if isinstance(node, ast.Constant):
        v = node.value
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ExpressionSyntaxError(f"bad literal in {text!r}")
        return RatFunc.const(Fraction(v) if isinstance(v, int) else Fraction(repr(v)))
    if isinstance(node, ast.Name):
        if allowed is not None and node.id not in allowed:
            raise SymbolError(f"undeclared symbol {node.id!r} in {text!r}")
        return RatFunc.var(node.id)
    if isinstance(node, ast.UnaryOp):
        v = _walk(node.operand, allowed, text)
        if isinstance(node.op, ast.USub):
            return -v
        if isinstance(node.op, ast.UAdd):
            return v
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            e = _int_exponent(node.right, text)
            return _walk(node.left, allowed, text) ** e
        left = _walk(node.left, allowed, text)
        right = _walk(node.right, allowed, text)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if right.is_zero():
                raise ExpressionSyntaxError(f"division by zero in {text!r}")
            return left / right
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "sqrt":
        if len(node.args) != 1 or node.keywords:
            raise ExpressionSyntaxError("sqrt takes exactly one argument")
        arg = _walk(node.args[0], allowed, text)
        if isinstance(arg, QuadExt):
            raise ExpressionSyntaxError("nested square roots are not supported")
        return sqrt_of(arg)
    raise ExpressionSyntaxError(f"unsupported construct in {text!r}")


def _int_exponent(node, text) -> int:
    sign = 1
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        sign, node = -1, node.operand
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return sign * node.value
    raise ExpressionSyntaxError(f"exponents must be integer literals in {text!r}")


# -- formatting ---------------------------------------------------------------

def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _fmt_mono(m) -> str:
    return "*".join(n if e == 1 else f"{n}^{e}" for n, e in m)


def format_poly(p: Poly) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for m, c in p.sorted_terms():
        neg = c < 0
        a = -c if neg else c
        if not m:
            body = _fmt_coeff(a)
        elif a == 1:
            body = _fmt_mono(m)
        else:
            body = f"{_fmt_coeff(a)}*{_fmt_mono(m)}"
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts)


def _wrap(p: Poly) -> str:
    """Parenthesize unless the polynomial is a single symbol or a positive integer."""
    s = format_poly(p)
    if len(p.terms) == 1:
        (m, c), = p.terms.items()
        if c == 1 and len(m) == 1 and m[0][1] == 1:
            return s
        if not m and c > 0 and c.denominator == 1:
            return s
    return f"({s})"


def format_ratfunc(r: RatFunc) -> str:
    if r.den.is_const() and r.den.const_value() == 1:
        return format_poly(r.num)
    return f"{_wrap(r.num)}/{_wrap(r.den)}"


def format_quadext(q: QuadExt) -> str:
    if q.b.is_zero():
        return format_ratfunc(q.a)
    root = f"sqrt({format_poly(q.radicand)})"
    bs = format_ratfunc(q.b)
    if bs == "1":
        b = root
    elif q.b.den.is_const() and len(q.b.num.terms) == 1 and q.b.num.leading_coeff() > 0 and "/" not in bs:
        b = f"{bs}*{root}"
    else:
        b = f"({bs})*{root}"
    if q.a.is_zero():
        return b
    return f"{format_ratfunc(q.a)} + {b}"


def format_value(x) -> str:
    if isinstance(x, QuadExt):
        return format_quadext(x)
    if isinstance(x, RatFunc):
        return format_ratfunc(x)
    if isinstance(x, Poly):
        return format_poly(x)
    return str(x)
