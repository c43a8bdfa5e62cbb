"""Pinch points of propagator subsets.

The ansatz puts each involved loop momentum in the span of the externals that
appear in the shifts of its loop cluster, q_a = sum_e alpha_{a,e} p_e, with the
transverse part at zero.  Propagators sharing a routing give differences that
are linear in alpha.  Stage one solves these per loop; a one-dimensional
leftover direction is fixed by that group's own quadric, which introduces a
parameter t_a obeying a quadratic equation (so alpha is quadratic-algebraic).
Stage two substitutes the per-loop results into the coupled propagators and
solves whatever is still linear.  The equations left over are the residual
conditions on the invariants.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .diagram import Diagram, MomentumExpr, expand_propagator
from .errors import PoleAtPoint, UnsupportedPinch
from .exactalg import Poly, QuadExt, RatFunc, det, format_value, sqrt_of
from .exactalg.linalg import row_reduce
from .exactalg.poly import normalize_sign, primitive
from .exactalg.quadext import RadicandMismatch
from .exactalg.ratfunc import ZERO_RF


class Classification(str, enum.Enum):
    FINITE = "Finite"
    AT_INFINITY = "AtInfinity"
    NON_ISOLATED = "NonIsolated"


def alpha_symbol(loop: int, ext: str) -> str:
    return f"alpha{loop + 1}_{ext}"


def param_symbol(loop: int) -> str:
    return f"t{loop + 1}"


def normalized_routing(routing: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Routing with first nonzero entry positive, and the sign used."""
    for x in routing:
        if x:
            sign = 1 if x > 0 else -1
            return tuple(sign * y for y in routing), sign
    return tuple(routing), 1


def propagator_key(diagram: Diagram, i: int):
    p = diagram.propagators[i]
    r, sign = normalized_routing(p.routing)
    return r, tuple((e, sign * c) for e, c in p.shift), p.mass_sq


def enumerate_subsets(diagram: Diagram, max_size: int) -> list[tuple[int, ...]]:
    """All subsets of size 2..max_size without exact duplicate propagators.

    Ordered by size, then lexicographically.
    """
    n = len(diagram.propagators)
    if not 2 <= max_size <= n:
        raise ValueError(f"max_size must lie in [2, {n}], got {max_size}")
    keys = [propagator_key(diagram, i) for i in range(n)]
    out = []
    for size in range(2, max_size + 1):
        for sub in itertools.combinations(range(n), size):
            seen = set()
            dup = False
            for i in sub:
                k = (keys[i][0], keys[i][1], str(keys[i][2]))
                if k in seen:
                    dup = True
                    break
                seen.add(k)
            if not dup:
                out.append(sub)
    return out


# -- data ---------------------------------------------------------------------

@dataclass(frozen=True)
class Param:
    """A parameter t fixed by a quadric: quadric(t) = 0 (polynomial in t and invariants)."""

    symbol: str
    loop: int
    quadric: Poly
    source: int  # propagator whose quadric was consumed
    explicit: QuadExt | RatFunc | None = None


@dataclass(frozen=True)
class PinchSolution:
    subset: tuple[int, ...]
    involved_loops: tuple[int, ...]
    span: tuple[tuple[int, tuple[str, ...]], ...]
    alpha_param: tuple[tuple[int, tuple[tuple[str, RatFunc], ...]], ...]
    alpha: tuple[tuple[int, tuple[tuple[str, object], ...]], ...] | None
    classification: Classification
    parallel_rank: int
    params: tuple[Param, ...] = ()
    residuals: tuple = ()
    residual_sources: tuple[int, ...] = ()
    consumed: tuple[int, ...] = ()
    notes: tuple[str, ...] = ()
    gram_dets: tuple = ()

    @property
    def span_map(self) -> dict[int, tuple[str, ...]]:
        return dict(self.span)

    def alpha_map(self) -> dict[int, dict[str, object]] | None:
        if self.alpha is None:
            return None
        return {a: dict(v) for a, v in self.alpha}

    def alpha_param_map(self) -> dict[int, dict[str, RatFunc]]:
        return {a: dict(v) for a, v in self.alpha_param}

    @property
    def residual(self):
        return self.residuals[0] if len(self.residuals) == 1 else None

    def loop_momenta(self, diagram: Diagram, explicit: bool = False) -> list[MomentumExpr]:
        """Q_a as momentum expressions (zero for loops not involved)."""
        src = self.alpha_map() if explicit else self.alpha_param_map()
        if src is None:
            raise ValueError("no explicit pinch coordinates for this subset")
        q = []
        for a in range(diagram.loops):
            q.append(MomentumExpr.make(external=src.get(a, {})))
        return q

    def to_dict(self) -> dict:
        am = self.alpha_map()
        out = {
            "subset": list(self.subset),
            "classification": self.classification.value,
            "parallel_rank": self.parallel_rank,
            "involved_loops": list(self.involved_loops),
            "span": {str(a): list(v) for a, v in self.span},
            "alpha": (
                {str(a): {e: format_value(v) for e, v in d.items()} for a, d in am.items()}
                if am is not None
                else None
            ),
            "params": [
                {"symbol": p.symbol, "loop": p.loop, "quadric": format_value(p.quadric), "source": p.source}
                for p in self.params
            ],
            "residuals": [format_value(r) for r in self.residuals],
            "notes": list(self.notes),
        }
        if self.params:
            out["alpha_param"] = {
                str(a): {e: format_value(v) for e, v in d.items()} for a, d in self.alpha_param_map().items()
            }
        return out


# -- helpers -------------------------------------------------------------------

def _as_rf(x) -> RatFunc:
    return x if isinstance(x, RatFunc) else RatFunc.lift(x)


def linear_form(expr: RatFunc, syms: Sequence[str]) -> tuple[list[RatFunc], RatFunc] | None:
    """Coefficients and constant if ``expr`` is affine in ``syms``, else None."""
    num, den = expr.num, RatFunc.lift(expr.den)
    if any(s in den.variables() for s in syms):
        return None
    for m in num.terms:
        if sum(e for n, e in m if n in syms) > 1:
            return None
    coeffs = [RatFunc.lift(num.coeff(s, 1)) / den for s in syms]
    rest = num
    for s in syms:
        rest = rest.coeff(s, 0)
    return coeffs, RatFunc.lift(rest) / den


def _depends(expr, syms) -> bool:
    v = set(expr.variables())
    return any(s in v for s in syms)


def _subs(expr, values: Mapping[str, object]):
    if not values:
        return expr
    relevant = {k: v for k, v in values.items() if k in expr.variables()}
    if not relevant:
        return expr
    return _as_rf(expr.subs(relevant)) if not any(isinstance(v, QuadExt) for v in relevant.values()) else expr.subs(relevant)


def _quadric_param(expr: RatFunc, t: str) -> tuple[Poly, RatFunc | QuadExt]:
    """Clear denominators of a quadratic equation in t and solve it.

    Returns the primitive quadric polynomial and the explicit root (RatFunc
    when the equation is linear in t, else QuadExt on the + branch).
    """
    quad = normalize_sign(primitive(expr.num))
    deg = quad.degree(t)
    A = RatFunc.lift(quad.coeff(t, 2))
    B = RatFunc.lift(quad.coeff(t, 1))
    C = RatFunc.lift(quad.coeff(t, 0))
    if deg == 1:
        return quad, -C / B
    if deg != 2:
        raise UnsupportedPinch(f"parameter equation of degree {deg} in {t}: {quad}")
    if any(v.startswith("t") and v != t and v[1:].isdigit() for v in quad.variables()):
        return quad, None
    disc = (B * B - A * C * 4) / (A * A * 4)
    root = sqrt_of(disc)
    return quad, QuadExt(-B / (A * 2), 0, root.radicand) + root


def _gram_det(diagram: Diagram, names: Sequence[str]) -> RatFunc:
    if not names:
        return RatFunc.const(1)
    return _as_rf(det(diagram.gram_matrix(names)))


def _clusters(diagram: Diagram, subset: Sequence[int]) -> list[list[int]]:
    parent: dict[int, int] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in subset:
        ls = diagram.propagators[i].loops()
        for a in ls:
            parent.setdefault(a, a)
        for a in ls[1:]:
            ra, rb = find(ls[0]), find(a)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for a in sorted(parent):
        groups.setdefault(find(a), []).append(a)
    return list(groups.values())


# -- solver ---------------------------------------------------------------------

def solve_pinch(diagram: Diagram, subset: Sequence[int], base: int | None = None) -> PinchSolution:
    """Solve the pinch system for ``subset``.

    ``base`` selects which propagator of a same-routing group supplies the
    quadric (default: the first one of each group).
    """
    subset = tuple(sorted(set(subset)))
    n = len(diagram.propagators)
    if not subset or any(not 0 <= i < n for i in subset):
        raise ValueError(f"invalid subset {subset}")
    notes: list[str] = []
    clusters = _clusters(diagram, subset)
    involved = tuple(sorted(a for c in clusters for a in c))
    span: dict[int, tuple[str, ...]] = {}
    gram_dets = []
    for cl in clusters:
        used = set()
        for i in subset:
            if set(diagram.propagators[i].loops()) & set(cl):
                used.update(e for e, _ in diagram.propagators[i].shift)
        names = tuple(e for e in diagram.externals if e in used)
        for a in cl:
            span[a] = names
        gram_dets.append((tuple(cl), _gram_det(diagram, names)))

    alpha_syms = {a: [alpha_symbol(a, e) for e in span[a]] for a in involved}
    q = []
    for a in range(diagram.loops):
        if a in span:
            q.append(MomentumExpr.make(external={e: RatFunc.var(alpha_symbol(a, e)) for e in span[a]}))
        else:
            q.append(MomentumExpr.make())
    D = {i: _as_rf(expand_propagator(diagram, i, q)) for i in subset}

    def finish(cls, rank, values, params, residuals, sources, consumed, extra_notes=()):
        aparam = []
        for a in involved:
            aparam.append((a, tuple((e, _as_rf(values.get(alpha_symbol(a, e), RatFunc.var(alpha_symbol(a, e))))) for e in span[a])))
        explicit = _explicit_alpha(aparam, params)
        return PinchSolution(
            subset=subset,
            involved_loops=involved,
            span=tuple(sorted(span.items())),
            alpha_param=tuple(aparam),
            alpha=explicit,
            classification=cls,
            parallel_rank=rank,
            params=tuple(params),
            residuals=tuple(residuals),
            residual_sources=tuple(sources),
            consumed=tuple(consumed),
            notes=tuple(notes) + tuple(extra_notes),
            gram_dets=tuple(gram_dets),
        )

    degenerate = [cl for cl, g in gram_dets if g.is_zero()]
    if degenerate:
        notes.append(f"Gram determinant of the span for loops {degenerate} vanishes identically: cycle at infinity")
        return finish(Classification.AT_INFINITY, 0, {}, [], [], [], [])

    if len(subset) == 1:
        # critical point of a single quadric: the propagator momentum vanishes
        i = subset[0]
        prop = diagram.propagators[i]
        syms = [(a, e) for a in involved for e in span[a]]
        shift = dict(prop.shift)
        rows, rhs = [], []
        for e in span[involved[0]]:
            rows.append([RatFunc.const(prop.routing[a]) if e2 == e else ZERO_RF for a, e2 in syms])
            rhs.append(RatFunc.const(-shift.get(e, 0)))
        values = {}
        rank = 0
        if rows:
            red = row_reduce(rows, rhs)
            rank = len(red.pivots)
            for r_i, c in enumerate(red.pivots):
                values[alpha_symbol(*syms[c])] = red.rows[r_i][len(syms)]
            for c, (a, e) in enumerate(syms):
                values.setdefault(alpha_symbol(a, e), ZERO_RF)
        res = _subs(D[i], values)
        notes.append("single propagator: pinch at the critical point of its quadric")
        return finish(Classification.FINITE, rank, values, [], [res], [i], [])

    # group by normalized routing
    groups: dict[tuple[int, ...], list[int]] = {}
    for i in subset:
        r, _ = normalized_routing(diagram.propagators[i].routing)
        groups.setdefault(r, []).append(i)
    for g in groups.values():
        if base is not None and base in g:
            g.remove(base)
            g.insert(0, base)

    values: dict[str, object] = {}
    params: list[Param] = []
    rank = 0
    consumed: list[int] = []
    pending: list[tuple[int, RatFunc]] = []
    coupled_lin: list[tuple[int, RatFunc]] = []

    # stage one: loops reached by single-loop groups
    per_loop: dict[int, list[list[int]]] = {}
    for r, g in groups.items():
        ls = [a for a, x in enumerate(r) if x]
        if len(ls) == 1:
            per_loop.setdefault(ls[0], []).append(g)
        else:
            for i in g[1:]:
                coupled_lin.append((i, D[i] - D[g[0]]))
            pending.append((g[0], D[g[0]]))
    for a in sorted(per_loop):
        syms = alpha_syms[a]
        rows, rhs = [], []
        for g in per_loop[a]:
            for i in g[1:]:
                lf = linear_form(D[i] - D[g[0]], syms)
                if lf is None:
                    raise UnsupportedPinch(f"difference D{i} - D{g[0]} is not linear in loop {a + 1}")
                rows.append(lf[0])
                rhs.append(-lf[1])
        bases = [g[0] for g in per_loop[a]]
        if rows:
            red = row_reduce(rows, rhs)
            rank += len(red.pivots)
            pending.extend((-1, c) for c in red.leftovers)
            free = [c for c in range(len(syms)) if c not in red.pivots]
            t = param_symbol(a)
            sol = {}
            for r_i, c in enumerate(red.pivots):
                expr = red.rows[r_i][len(syms)]
                for f in free:
                    coef = red.rows[r_i][f]
                    if not coef.is_zero():
                        fv = RatFunc.var(t) if len(free) == 1 else RatFunc.var(syms[f])
                        expr = expr - coef * fv
                sol[syms[c]] = expr
            if len(free) == 1:
                sol[syms[free[0]]] = RatFunc.var(t)
                b0 = bases.pop(0)
                quad, explicit = _quadric_param(_subs(D[b0], sol), t)
                params.append(Param(t, a, quad, b0, explicit))
                consumed.append(b0)
                rank += 1
            values.update(sol)
        pending.extend((b, D[b]) for b in bases)

    # stage two: substitute and solve what is linear in the remaining unknowns
    eqs = [(src, _subs(e, values)) for src, e in coupled_lin + pending]
    while True:
        eqs = [(src, e) for src, e in eqs if not e.is_zero()]
        free_syms = sorted({s for _, e in eqs for s in e.variables() if s.startswith("alpha")})
        if not free_syms:
            break
        lin_rows, lin_rhs, lin_idx = [], [], []
        for k, (src, e) in enumerate(eqs):
            if not _depends(e, free_syms):
                continue
            lf = linear_form(e, free_syms)
            if lf is not None:
                lin_rows.append(lf[0])
                lin_rhs.append(-lf[1])
                lin_idx.append(k)
        if lin_rows:
            red = row_reduce(lin_rows, lin_rhs)
            rank += len(red.pivots)
            sol = {}
            for r_i, c in enumerate(red.pivots):
                expr = red.rows[r_i][len(free_syms)]
                for c2 in range(len(free_syms)):
                    if c2 not in red.pivots and not red.rows[r_i][c2].is_zero():
                        expr = expr - red.rows[r_i][c2] * RatFunc.var(free_syms[c2])
                sol[free_syms[c]] = expr
            values = {k: _subs(v, sol) for k, v in values.items()}
            values.update(sol)
            keep = [eqs[k] for k in range(len(eqs)) if k not in lin_idx]
            eqs = [(src, _subs(e, sol)) for src, e in keep] + [(-1, c) for c in red.leftovers]
            continue
        if len(free_syms) == 1:
            s = free_syms[0]
            k = min((k for k, (_, e) in enumerate(eqs) if _depends(e, [s])), key=lambda k: eqs[k][1].num.degree(s))
            src, e = eqs.pop(k)
            a = int(s[5:s.index("_")]) - 1
            t = param_symbol(a)
            if any(p.symbol == t for p in params):
                t = f"{t}b"
            e_t = _subs(e, {s: RatFunc.var(t)})
            quad, explicit = _quadric_param(e_t, t)
            params.append(Param(t, a, quad, src, explicit))
            consumed.append(src)
            rank += 1
            sol = {s: RatFunc.var(t)}
            values = {k2: _subs(v, sol) for k2, v in values.items()}
            values[s] = RatFunc.var(t)
            eqs = [(src2, _subs(e2, sol)) for src2, e2 in eqs]
            continue
        dep = [e for _, e in eqs if _depends(e, free_syms)]
        if dep:
            raise UnsupportedPinch(f"bilinear coupling left unresolved: {format_value(dep[0])} = 0")
        break

    free_left = [s for a in involved for s in alpha_syms[a] if s not in values]
    residuals = [e for _, e in eqs]
    sources = [src for src, _ in eqs]
    if free_left:
        return finish(Classification.NON_ISOLATED, rank, values, params, residuals, sources, consumed,
                      [f"pinch coordinates {free_left} are left undetermined"])
    if len(residuals) == 1:
        ok, why = multiplier_check(diagram, subset, span, values, params)
        if not ok:
            return finish(Classification.NON_ISOLATED, rank, values, params, residuals, sources, consumed, [why])
        extra = [why] if why else []
        return finish(Classification.FINITE, rank, values, params, residuals, sources, consumed, extra)
    if not residuals:
        return finish(Classification.NON_ISOLATED, rank, values, params, residuals, sources, consumed,
                      ["no residual condition: the pinch exists for all kinematics"])
    return finish(Classification.NON_ISOLATED, rank, values, params, residuals, sources, consumed,
                  [f"{len(residuals)} residual conditions: overdetermined stratum"])


def gradient_matrix(diagram: Diagram, subset: Sequence[int], span: Mapping[int, Sequence[str]], values: Mapping[str, object]):
    """Rows (loop a, external e), columns i in subset: l_{i,a} times the e-coefficient of k_i at the pinch."""
    rows = []
    for a in sorted(span):
        for e in span[a]:
            row = []
            for i in subset:
                prop = diagram.propagators[i]
                la = prop.routing[a]
                if not la:
                    row.append(ZERO_RF)
                    continue
                coef = RatFunc.const(dict(prop.shift).get(e, 0))
                for b, lb in enumerate(prop.routing):
                    if lb and b in span and e in span[b]:
                        coef = coef + values[alpha_symbol(b, e)] * lb
                row.append(coef * la)
            rows.append(row)
    return rows


def multiplier_check(diagram, subset, span, values, params, seed: int = 20240917) -> tuple[bool, str]:
    """Is there a multiplier vector a (all a_i != 0) with sum_i a_i l_{i,a} k_i = 0?

    Exact when the pinch coordinates are rational or share one radicand;
    otherwise checked at a seeded random rational kinematic point.
    """
    explicit = {}
    for p in params:
        if p.explicit is None:
            explicit = None
            break
        explicit[p.symbol] = p.explicit
    n = len(subset)
    try:
        if explicit is not None:
            vals = {k: (v.subs({s: x for s, x in explicit.items() if s in v.variables()}) if isinstance(v, RatFunc) and any(s in v.variables() for s in explicit) else v)
                    for k, v in values.items()}
            G = gradient_matrix(diagram, subset, span, vals)
            if not G:
                return True, ""
            red = row_reduce(G, [ZERO_RF] * len(G))
            free = [c for c in range(n) if c not in red.pivots]
            if not free:
                return False, "multiplier system has only the trivial solution: no pinch for this subset"
            support = set(free)
            for r_i, c in enumerate(red.pivots):
                if any(not red.rows[r_i][f].is_zero() for f in free):
                    support.add(c)
            note = "" if len(free) == 1 else f"multiplier kernel has dimension {len(free)}"
            if len(support) < n:
                missing = [subset[c] for c in range(n) if c not in support]
                return False, f"multipliers of propagators {missing} are forced to vanish: the pinch belongs to a smaller subset"
            return True, note
    except RadicandMismatch:
        pass
    return _numeric_multiplier_check(diagram, subset, span, values, params, seed)


def _numeric_multiplier_check(diagram, subset, span, values, params, seed):
    import random

    import numpy as np

    rng = random.Random(seed)
    syms = set(diagram.invariant_symbols())
    for v in values.values():
        syms.update(x for x in v.variables() if not x.startswith("t"))
    kin = {x: Fraction(rng.randint(-40, 40) or 7, rng.randint(1, 9)) for x in sorted(syms)}
    sol = PinchSolution(
        subset=tuple(subset), involved_loops=tuple(sorted(span)), span=tuple(sorted(span.items())),
        alpha_param=tuple((a, tuple((e, _as_rf(values[alpha_symbol(a, e)])) for e in span[a])) for a in sorted(span)),
        alpha=None, classification=Classification.FINITE, parallel_rank=0, params=tuple(params),
    )
    branch = eval_pinch(sol, kin)[0]
    tv = branch["params"]
    G = gradient_matrix(diagram, subset, span, values)
    M = np.array([[complex(_eval_mixed(x, kin, tv)) for x in row] for row in G], dtype=complex)
    n = len(subset)
    if M.size == 0:
        return True, ""
    u, sv, vh = np.linalg.svd(M)
    tol = 1e-9 * max(1.0, sv.max())
    rank = int((sv > tol).sum())
    if rank >= n:
        return False, "multiplier system has only the trivial solution: no pinch for this subset"
    kernel = vh[rank:].conj().T
    support = np.abs(kernel).max(axis=1) > 1e-9
    if not support.all():
        missing = [subset[c] for c in range(n) if not support[c]]
        return False, f"multipliers of propagators {missing} are forced to vanish: the pinch belongs to a smaller subset"
    note = "multiplier condition checked numerically at a random kinematic point"
    if n - rank > 1:
        note += f"; kernel dimension {n - rank}"
    return True, note


def _explicit_alpha(aparam, params: Sequence[Param]):
    """Substitute explicit parameter values when they share one radicand."""
    subs = {}
    for p in params:
        if p.explicit is None:
            return None
        subs[p.symbol] = p.explicit
    out = []
    try:
        for a, d in aparam:
            row = []
            for e, v in d:
                used = {k: w for k, w in subs.items() if k in v.variables()}
                row.append((e, v.subs(used) if used else v))
            out.append((a, tuple(row)))
    except (RadicandMismatch, ZeroDivisionError):
        return None
    return tuple(out)


def explicit_residual(sol: PinchSolution):
    """The residual with explicit parameter values, or None when not representable."""
    if sol.residual is None:
        return None
    subs = {p.symbol: p.explicit for p in sol.params}
    if any(v is None for v in subs.values()):
        return None
    used = {k: v for k, v in subs.items() if k in sol.residual.variables()}
    try:
        return sol.residual.subs(used) if used else sol.residual
    except RadicandMismatch:
        return None


# -- numeric gateway ------------------------------------------------------------

def _exact(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    return Fraction(str(v)) if isinstance(v, str) else Fraction(v)


def eval_pinch(sol: PinchSolution, kinematics: Mapping[str, object]) -> list[dict]:
    """Numeric pinch coordinates, one record per sign branch of the parameters.

    Rational functions are evaluated exactly at the (rationalized) point, so a
    vanishing denominator is detected exactly and raises PoleAtPoint.
    """
    import cmath

    kin = {k: _exact(v) for k, v in kinematics.items()}
    branches = list(itertools.product((1, -1), repeat=len(sol.params)))
    out = []
    for br in branches:
        tvals: dict[str, complex] = {}
        for p, sgn in zip(sol.params, br):
            quad = p.quadric
            coeffs = {}
            for k in (0, 1, 2):
                c = quad.coeff(p.symbol, k)
                coeffs[k] = complex(_eval_mixed(c, kin, tvals))
            A, B, C = coeffs[2], coeffs[1], coeffs[0]
            if A == 0:
                if B == 0:
                    raise PoleAtPoint(f"parameter {p.symbol} is undetermined at this point")
                tvals[p.symbol] = -C / B
            else:
                root = cmath.sqrt(B * B - 4 * A * C)
                tvals[p.symbol] = (-B + sgn * root) / (2 * A)
        alpha = {}
        for a, d in sol.alpha_param:
            alpha[a] = {e: complex(_eval_mixed(v, kin, tvals)) for e, v in d}
        out.append({"branch": br, "alpha": alpha, "params": dict(tvals)})
    return out


def _eval_mixed(v, kin, tvals):
    """Evaluate a RatFunc/Poly exactly in the invariants, numerically in parameters."""
    if isinstance(v, Poly):
        v = RatFunc.lift(v)
    exact = {k: x for k, x in kin.items() if k in v.variables()}
    missing = [s for s in v.variables() if s not in kin and s not in tvals]
    if missing:
        raise KeyError(f"no value for {missing}")
    try:
        w = v.subs(exact) if exact else v
    except ZeroDivisionError:
        raise PoleAtPoint("a denominator vanishes at this kinematic point") from None
    if w.is_const():
        return complex(w.const_value())
    num = w.num.evaluate(tvals)
    den = w.den.evaluate(tvals)
    if den == 0:
        raise PoleAtPoint("a denominator vanishes at this kinematic point")
    return num / den


def eval_explicit(value, kinematics: Mapping[str, object], branch: int = 1) -> complex:
    """Evaluate a RatFunc or QuadExt at a kinematic point, exact up to the square root."""
    kin = {k: _exact(v) for k, v in kinematics.items()}
    try:
        if isinstance(value, QuadExt):
            return value.evaluate(kin, branch)
        return complex(RatFunc.lift(value).evaluate(kin))
    except ZeroDivisionError:
        raise PoleAtPoint("a denominator vanishes at this kinematic point") from None
