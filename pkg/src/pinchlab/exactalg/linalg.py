"""Exact linear algebra over RatFunc / QuadExt: solving, determinants, resultants."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..errors import DegenerateInput, InconsistentSystem
from .poly import ONE, Poly, normalize_sign
from .quadext import QuadExt
from .ratfunc import ONE_RF, ZERO_RF, RatFunc


def _lift(x):
    if isinstance(x, (RatFunc, QuadExt)):
        return x
    return RatFunc.lift(x)


def _is_zero(x) -> bool:
    return x.is_zero()


def _weight(x) -> int:
    """Cheap size measure used to prefer simple pivots."""
    if isinstance(x, QuadExt):
        return _weight(x.a) + _weight(x.b) + 1
    return len(x.num.terms) + len(x.den.terms)


@dataclass(frozen=True)
class LinearSolution:
    solution: list
    rank: int
    nullspace_dim: int
    nullspace: list = field(default_factory=list)
    pivots: tuple = ()


@dataclass(frozen=True)
class RowReduction:
    """Reduced row echelon data of an augmented system [A | b]."""

    rows: list
    pivots: tuple
    leftovers: list  # right-hand sides of rows that reduced to 0 = c, c != 0


def row_reduce(A: Sequence[Sequence], b: Sequence) -> RowReduction:
    m = len(A)
    if m != len(b):
        raise ValueError("row count of A and length of b differ")
    n = len(A[0]) if m else 0
    M = [[_lift(x) for x in row] + [_lift(bi)] for row, bi in zip(A, b)]
    for row in M:
        if len(row) != n + 1:
            raise ValueError("A is not rectangular")
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        cands = [i for i in range(r, m) if not _is_zero(M[i][c])]
        if not cands:
            continue
        p = min(cands, key=lambda i: _weight(M[i][c]))
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv if not _is_zero(x) else x for x in M[r]]
        for i in range(m):
            if i != r and not _is_zero(M[i][c]):
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    leftovers = [M[i][n] for i in range(r, m) if not _is_zero(M[i][n])]
    return RowReduction(M[:r], tuple(pivots), leftovers)


def solve_linear(A: Sequence[Sequence], b: Sequence) -> LinearSolution:
    """Solve A x = b exactly; free variables are set to zero.

    Returns the particular solution, rank, nullspace dimension and a nullspace
    basis.  Raises InconsistentSystem when no solution exists.
    """
    n = len(A[0]) if len(A) else 0
    red = row_reduce(A, b)
    if red.leftovers:
        raise InconsistentSystem(f"system reduces to 0 = {red.leftovers[0]}")
    r = len(red.pivots)
    x = [ZERO_RF] * n
    for i, c in enumerate(red.pivots):
        x[c] = red.rows[i][n]
    basis = []
    for fc in (c for c in range(n) if c not in red.pivots):
        v = [ZERO_RF] * n
        v[fc] = ONE_RF
        for i, c in enumerate(red.pivots):
            v[c] = -red.rows[i][fc]
        basis.append(v)
    return LinearSolution(x, r, n - r, basis, red.pivots)


def matvec(A, x):
    out = []
    for row in A:
        acc = ZERO_RF
        for a, xi in zip(row, x):
            acc = acc + _lift(a) * xi
        out.append(acc)
    return out


def det(A: Sequence[Sequence]):
    """Exact determinant.

    RatFunc entries: denominators are cleared row-wise and fraction-free
    Bareiss elimination runs over polynomials.  QuadExt entries: Gaussian
    elimination over the extension field.
    """
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("det needs a square matrix")
    if n == 0:
        return ONE_RF
    if any(isinstance(x, QuadExt) for row in A for x in row):
        return _det_gauss([[QuadExt.lift(x) for x in row] for row in A])
    rows = [[RatFunc.lift(x) for x in row] for row in A]
    scale = ONE_RF
    P = []
    for row in rows:
        d = ONE
        for x in row:
            if not x.den.is_const():
                d = _poly_lcm(d, x.den)
        P.append([(x * RatFunc.lift(d)).as_poly() for x in row])
        scale = scale * RatFunc.lift(d)
    return RatFunc.lift(bareiss(P)) / scale


def det_column_expansion(col: Sequence, rest: Sequence[Sequence], position: int = 0):
    """det of the matrix with ``col`` inserted as column ``position`` into ``rest``.

    Expands along that column, so only the small minors of ``rest`` are
    formed; zero entries of ``col`` are skipped.
    """
    n = len(col)
    total = None
    for i, c in enumerate(col):
        if _is_zero(c):
            continue
        minor = [list(r) for j, r in enumerate(rest) if j != i]
        m = det(minor) if minor and minor[0] else 1
        term = c * m
        if (i + position) % 2:
            term = -term
        total = term if total is None else total + term
    return ZERO_RF if total is None else total


def _poly_lcm(a: Poly, b: Poly) -> Poly:
    from .poly import poly_gcd

    g = poly_gcd(a, b)
    return a.divexact(g) * b


def bareiss(M: Sequence[Sequence[Poly]]) -> Poly:
    """Fraction-free determinant of a polynomial matrix."""
    n = len(M)
    A = [list(map(Poly.lift, row)) for row in M]
    sign = 1
    prev = ONE
    for k in range(n - 1):
        if A[k][k].is_zero():
            swap = next((i for i in range(k + 1, n) if not A[i][k].is_zero()), None)
            if swap is None:
                return Poly()
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]).divexact(prev)
            A[i][k] = Poly()
        prev = A[k][k]
    out = A[n - 1][n - 1]
    return -out if sign < 0 else out


def _det_gauss(A):
    n = len(A)
    M = [list(r) for r in A]
    acc = QuadExt.lift(ONE_RF)
    for c in range(n):
        p = next((i for i in range(c, n) if not M[i][c].is_zero()), None)
        if p is None:
            return QuadExt.lift(ZERO_RF)
        if p != c:
            M[c], M[p] = M[p], M[c]
            acc = -acc
        piv = M[c][c]
        acc = acc * piv
        inv = piv.inverse() if not piv.is_rational() else QuadExt(piv.a.inverse(), 0, piv.radicand)
        for i in range(c + 1, n):
            if M[i][c].is_zero():
                continue
            f = M[i][c] * inv
            M[i] = [x - f * y for x, y in zip(M[i], M[c])]
    return acc


def cofactor_det(A: Sequence[Sequence]):
    """Laplace expansion along the first row; independent reference for small n."""
    n = len(A)
    if n == 0:
        return ONE_RF
    if n == 1:
        return _lift(A[0][0])
    total = None
    for j in range(n):
        if _is_zero(_lift(A[0][j])):
            continue
        minor = [row[:j] + row[j + 1:] for row in A[1:]]
        term = _lift(A[0][j]) * cofactor_det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return ZERO_RF if total is None else total


def sylvester_matrix(f: Poly, g: Poly, var: str) -> list[list[Poly]]:
    cf = f.coeffs_in(var)
    cg = g.coeffs_in(var)
    m = f.degree(var)
    n = g.degree(var)
    size = m + n
    zero = Poly()
    rows = []
    for i in range(n):
        row = [zero] * size
        for k in range(m + 1):
            row[i + (m - k)] = cf.get(k, zero)
        rows.append(row)
    for i in range(m):
        row = [zero] * size
        for k in range(n + 1):
            row[i + (n - k)] = cg.get(k, zero)
        rows.append(row)
    return rows


def _linear_resultant(f: Poly, g: Poly, var: str) -> Poly:
    """res(a*x + b, g) = sum_k g_k (-b)^k a^(n-k), the Sylvester value for deg f = 1."""
    a, b = f.coeff(var, 1), f.coeff(var, 0)
    n = g.degree(var)
    total = Poly()
    neg_b = -b
    for k, gk in g.coeffs_in(var).items():
        total = total + gk * neg_b**k * a ** (n - k)
    return total


def _small_case(f: Poly, g: Poly, var: str) -> Poly | None:
    m, n = f.degree(var), g.degree(var)
    if m == 1:
        return _linear_resultant(f, g, var)
    if n == 1:
        r = _linear_resultant(g, f, var)
        return -r if (m * n) % 2 else r
    return None


def resultant(f, g, var: str) -> Poly:
    """Sylvester resultant in ``var``, scaled so its leading coefficient is positive.

    Raises DegenerateInput if either input is identically zero.  A constant
    (degree-0 in ``var``) argument gives the usual power of that constant.
    """
    f = RatFunc.lift(f).as_poly() if not isinstance(f, Poly) else f
    g = RatFunc.lift(g).as_poly() if not isinstance(g, Poly) else g
    if f.is_zero() or g.is_zero():
        raise DegenerateInput("resultant of an identically zero polynomial")
    m, n = f.degree(var), g.degree(var)
    if m == 0 and n == 0:
        return normalize_sign(Poly.const(1))
    if m == 0:
        return normalize_sign(f**n)
    if n == 0:
        return normalize_sign(g**m)
    small = _small_case(f, g, var)
    if small is not None:
        return normalize_sign(small)
    return normalize_sign(bareiss(sylvester_matrix(f, g, var)))


def resultant_raw(f: Poly, g: Poly, var: str) -> Poly:
    """Sylvester determinant without sign normalization."""
    m, n = f.degree(var), g.degree(var)
    if m == 0:
        return f**n
    if n == 0:
        return g**m
    small = _small_case(f, g, var)
    if small is not None:
        return small
    return bareiss(sylvester_matrix(f, g, var))
