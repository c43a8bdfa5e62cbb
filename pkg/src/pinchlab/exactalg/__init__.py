from __future__ import annotations

from .expr import format_value, parse_expr
from .linalg import LinearSolution, bareiss, cofactor_det, det, resultant, solve_linear
from .poly import ONE, ZERO, NotDivisible, Poly, normalize_sign, poly_gcd, primitive, sqf_split
from .quadext import QuadExt, RadicandMismatch, sqrt_of
from .ratfunc import ONE_RF, ZERO_RF, RatFunc


def normalize_poly(p: Poly) -> tuple[Poly, "object"]:
    """Primitive integer form with positive leading coefficient.

    Returns ``(q, c)`` with ``p == c * q``.
    """
    if p.is_zero():
        return p, 1
    c = p.content()
    q = p * (1 / c)
    if q.leading_coeff() < 0:
        q, c = -q, -c
    return q, c


__all__ = [
    "Poly", "RatFunc", "QuadExt", "ZERO", "ONE", "ZERO_RF", "ONE_RF",
    "NotDivisible", "RadicandMismatch", "LinearSolution",
    "solve_linear", "det", "bareiss", "cofactor_det", "resultant",
    "poly_gcd", "primitive", "normalize_sign", "normalize_poly", "sqf_split", "sqrt_of",
    "parse_expr", "format_value",
]
