"""Landau polynomials for pinch subsets.

Several constructions are offered and compared through quotients, since no
canonical overall factor exists: elimination from a pinch solution, the
bordered Gram determinant for one-loop subsets, the parallel-gradient
determinant with the residue normalization, and the five-pinch block
determinant of the crossed two-loop vertex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .diagram import Diagram, MomentumExpr, expand_propagator, propagator_momentum
from .errors import NotFinite, NotOneLoopSubset, ShapeMismatch, UnsupportedPinch
from .exactalg import Poly, QuadExt, RatFunc, det, format_value, normalize_poly, resultant, sqrt_of
from .exactalg.linalg import det_column_expansion
from .exactalg.poly import NotDivisible, factor_list, pseudo_rem, radical
from .pinch import Classification, PinchSolution, alpha_symbol, normalized_routing

NORMALIZATION = "primitive integer polynomial with positive leading coefficient (grlex)"


@dataclass(frozen=True)
class LandauPolynomial:
    poly: Poly | QuadExt | RatFunc
    subset: tuple[int, ...]
    normalization: str
    branch: tuple[int, ...] | None = None
    factor: object = None  # residual (or determinant) == factor * poly, when known
    method: str = ""
    quotient: object = None  # against landau_from_pinch, when computed

    def evaluate(self, values, branch: int = 1) -> complex:
        if isinstance(self.poly, QuadExt):
            return self.poly.evaluate(values, branch)
        return complex(RatFunc.lift(self.poly).evaluate(values))

    def to_dict(self) -> dict:
        out = {
            "subset": list(self.subset),
            "poly": format_value(self.poly),
            "normalization": self.normalization,
            "branch": list(self.branch) if self.branch is not None else None,
            "method": self.method,
        }
        if self.factor is not None:
            out["factor"] = format_value(self.factor)
        if self.quotient is not None:
            out["quotient"] = format_value(self.quotient)
        return out


def _require_finite(sol: PinchSolution):
    if sol.classification is not Classification.FINITE:
        raise NotFinite(f"subset {list(sol.subset)} is classified {sol.classification.value}")


def eliminate_params(num: Poly, params) -> Poly:
    """Remove the quadric parameters t from ``num`` by resultants, last parameter first."""
    r = num
    for p in reversed(params):
        t = p.symbol
        if t not in r.variables():
            continue
        r = pseudo_rem(r, p.quadric, t)
        if t in r.variables():
            r = resultant(r, p.quadric, t)
    return r


def _spurious_factors(sol: PinchSolution, extra=()) -> list[Poly]:
    """Denominators met during elimination: residual denominator, quadric leading coefficients, Gram determinants."""
    polys = [RatFunc.lift(sol.residual).den] + [g.num for _, g in sol.gram_dets] + list(extra)
    for p in sol.params:
        polys.append(p.quadric.coeff(p.symbol, p.quadric.degree(p.symbol)))
    out = []
    for q in polys:
        for f, _ in factor_list(q)[1]:
            if f not in out:
                out.append(f)
    return out


def reduce_eliminant(p: Poly, spurious: Sequence[Poly]) -> tuple[Poly, list[Poly]]:
    """Divide out factors from ``spurious`` and take the square-free part.

    Returns (poly, removed).
    """
    removed = []
    for f in spurious:
        if f.is_const():
            continue
        while True:
            try:
                q = p.divexact(f)
            except NotDivisible:
                break
            if f not in removed:
                removed.append(f)
            p = q
    return radical(p), removed


def _normalized(p: Poly) -> tuple[Poly, Fraction]:
    q, c = normalize_poly(p)
    return q, Fraction(c)


def landau_from_pinch(sol: PinchSolution) -> LandauPolynomial:
    """Clear denominators in the residual condition and normalize."""
    _require_finite(sol)
    res = sol.residual
    if res is None:
        raise NotFinite("finite pinch without a single residual condition")
    res = RatFunc.lift(res)
    if sol.params:
        names = ", ".join(p.symbol for p in sol.params)
        raw = eliminate_params(res.num, sol.params)
        if raw.is_zero():
            raise NotFinite("the residual condition holds identically after elimination")
        poly, removed = reduce_eliminant(raw, _spurious_factors(sol))
        poly, _ = _normalized(poly)
        method = f"resultant elimination of {names}, radical taken"
        if removed:
            method += "; removed denominator factors " + ", ".join(format_value(f) for f in removed)
        return LandauPolynomial(poly, sol.subset, NORMALIZATION, method=method)
    if res.is_zero():
        raise NotFinite("the residual condition holds identically")
    poly, c = _normalized(res.num)
    factor = RatFunc.const(c) / RatFunc.lift(res.den)
    return LandauPolynomial(poly, sol.subset, NORMALIZATION, factor=factor, method="residual numerator")


# -- one-loop bordered Gram determinant --------------------------------------

def _one_loop_frame(diagram: Diagram, subset: Sequence[int]):
    """Normalized routing check; returns shifted momenta v_i relative to the first propagator."""
    routings = set()
    shifts = []
    for i in subset:
        prop = diagram.propagators[i]
        r, sign = normalized_routing(prop.routing)
        if sum(1 for x in r if x) != 1 or any(x not in (0, 1) for x in r):
            raise NotOneLoopSubset(f"propagator {i} has routing {list(prop.routing)}")
        routings.add(r)
        shifts.append(MomentumExpr.make(external={e: RatFunc.const(sign * c) for e, c in prop.shift}))
    if len(routings) != 1:
        raise NotOneLoopSubset(f"subset {list(subset)} mixes loop routings")
    return [s - shifts[0] for s in shifts]


def bordered_gram_det(diagram: Diagram, subset: Sequence[int]) -> RatFunc:
    """det [[v_i.v_j, -c_i/2], [-c_j/2, -m_0^2]] with v_i = shift_i - shift_0.

    Here c_i = v_i^2 + m_i^2 - m_0^2.  When the Gram block is invertible this
    equals -det(G) times the base propagator at the pinch point.
    """
    subset = list(subset)
    if len(subset) < 2:
        raise NotOneLoopSubset("need at least two propagators")
    v = _one_loop_frame(diagram, subset)[1:]
    m = [diagram.propagators[i].mass_sq for i in subset]
    c = [v[j].sq(diagram) + m[j + 1] - m[0] for j in range(len(v))]
    half = Fraction(1, 2)
    rows = [[v[i].dot(v[j], diagram) for j in range(len(v))] + [-c[i] * half] for i in range(len(v))]
    rows.append([-c[j] * half for j in range(len(v))] + [-m[0]])
    return RatFunc.lift(det(rows))


# -- parallel frame normalization ----------------------------------------------

def frame_volume(sol: PinchSolution, diagram: Diagram):
    """Product over involved loops of sqrt(Gram) of the loop's span.

    This converts a determinant in alpha coordinates into one in orthonormal
    coordinates of the parallel space.  Equal Gram factors pair into rational
    ones; the rest stay under one square root.
    """
    from .pinch import _gram_det

    grams = [_gram_det(diagram, sol.span_map[a]) for a in sol.involved_loops if sol.span_map[a]]
    rational = RatFunc.const(1)
    left: list[RatFunc] = []
    for g in grams:
        if g in left:
            left.remove(g)
            rational = rational * g
        else:
            left.append(g)
    if not left:
        return rational
    under = RatFunc.const(1)
    for g in left:
        under = under * g
    return sqrt_of(under) * rational


def single_radicand(sol: PinchSolution) -> bool:
    """True when every parameter is explicit and all square roots share one radicand."""
    if sol.alpha is None or any(p.explicit is None for p in sol.params):
        return False
    roots = {p.explicit.radicand for p in sol.params if isinstance(p.explicit, QuadExt) and not p.explicit.b.is_zero()}
    return len(roots) <= 1


def _explicit_values(sol: PinchSolution, branch=None):
    """alpha symbol -> value, with parameters substituted when explicit (QuadExt branches)."""
    values = {}
    aparam = sol.alpha_param_map()
    subs = {}
    if branch is not None:
        for p, sgn in zip(sol.params, branch):
            subs[p.symbol] = p.explicit if sgn > 0 else p.explicit.conj()
    for a, d in aparam.items():
        for e, v in d.items():
            used = {k: w for k, w in subs.items() if k in v.variables()}
            values[alpha_symbol(a, e)] = v.subs(used) if used else v
    return values


def _pinch_momenta(diagram: Diagram, sol: PinchSolution, values) -> list[MomentumExpr]:
    q = []
    for a in range(diagram.loops):
        if a in sol.span_map:
            q.append(MomentumExpr.make(external={e: values[alpha_symbol(a, e)] for e in sol.span_map[a]}))
        else:
            q.append(MomentumExpr.make())
    return q


def gradient_rows(diagram: Diagram, sol: PinchSolution, values) -> list[list]:
    """Rows [D_i(Q), dD_i/dalpha_{a,e}] for i in the subset (alpha coordinates)."""
    q = _pinch_momenta(diagram, sol, values)
    rows = []
    for i in sol.subset:
        k = propagator_momentum(diagram, i, q)
        row = [expand_propagator(diagram, i, q)]
        prop = diagram.propagators[i]
        for a in sol.involved_loops:
            for e in sol.span_map[a]:
                la = prop.routing[a]
                pe = MomentumExpr.make(external={e: RatFunc.const(1)})
                row.append(k.dot(pe, diagram) * (2 * la) if la else RatFunc.const(0))
        rows.append(row)
    return rows


def theorem4_normalized(diagram: Diagram, sol: PinchSolution, branch=None) -> LandauPolynomial:
    """det [D_i(Q), grad_par D_i(Q)] in orthonormal parallel coordinates.

    For a single propagator this is D_0(Q) itself.  With unresolved quadric
    parameters the determinant stays in parameter form and is compared with
    the pinch residual.
    """
    _require_finite(sol)
    if len(sol.subset) == 1:
        val = RatFunc.lift(sol.residual)
        return LandauPolynomial(val, sol.subset, "D_0 at the critical point", method="parallel-gradient determinant")
    explicit = single_radicand(sol)
    if branch is None and explicit and sol.params:
        branch = (1,) * len(sol.params)
    values = _explicit_values(sol, branch if explicit else None)
    rows = gradient_rows(diagram, sol, values)
    if any(len(r) != len(rows) for r in rows):
        raise UnsupportedPinch(
            f"parallel-gradient matrix is {len(rows)}x{len(rows[0])}: subset size must exceed the parallel dimension by one"
        )
    value = det_column_expansion([r[0] for r in rows], [r[1:] for r in rows])
    vol = frame_volume(sol, diagram)
    value = value / vol
    norm = "orthonormal parallel coordinates; overall sign fixed by the frame orientation"
    pending = [p for p in sol.params if p.symbol in value.variables()]
    if pending:
        # parameter form: compare with the residual of the pinch solution directly
        return LandauPolynomial(value, sol.subset, norm + "; parameter form",
                                method="parallel-gradient determinant (parameter form)",
                                quotient=_quotient(value, RatFunc.lift(sol.residual)))
    lfp = landau_from_pinch(sol)
    return LandauPolynomial(value, sol.subset, norm, branch=branch, method="parallel-gradient determinant",
                            quotient=_quotient(value, lfp.poly))


def _quotient(a, b):
    try:
        return a / b
    except (ZeroDivisionError, TypeError, ValueError):
        return None


# -- five-pinch block determinant -----------------------------------------------

@dataclass(frozen=True)
class FivePinchShape:
    q1: tuple[int, int]  # (on-shell at q1 = Q1, shifted by p)
    q2: tuple[int, int]
    coupled: int
    externals: tuple[str, str]


def five_pinch_shape(diagram: Diagram, subset: Sequence[int]) -> FivePinchShape:
    """Identify the layout q1, q1+p, q2, q2+p', q1+q2+p of a five-pinch subset."""
    subset = tuple(subset)
    if diagram.loops != 2 or len(subset) != 5:
        raise ShapeMismatch("five-pinch needs five propagators on two loops")
    singles: dict[int, list[int]] = {0: [], 1: []}
    coupled = []
    for i in subset:
        prop = diagram.propagators[i]
        r, _ = normalized_routing(prop.routing)
        if r in ((1, 0), (0, 1)):
            singles[r.index(1)].append(i)
        elif r == (1, 1):
            coupled.append(i)
        else:
            raise ShapeMismatch(f"propagator {i} has routing {list(prop.routing)}")
    if len(singles[0]) != 2 or len(singles[1]) != 2 or len(coupled) != 1:
        raise ShapeMismatch("five-pinch needs two propagators per loop and one coupling both loops")
    ordered = []
    for a in (0, 1):
        g = sorted(singles[a], key=lambda i: len(diagram.propagators[i].shift))
        if diagram.propagators[g[0]].shift:
            raise ShapeMismatch(f"loop {a + 1} needs an unshifted propagator")
        ordered.append(tuple(g))
    e1 = [e for e, _ in diagram.propagators[ordered[0][1]].shift]
    e2 = [e for e, _ in diagram.propagators[ordered[1][1]].shift]
    if len(e1) != 1 or len(e2) != 1 or e1 == e2:
        raise ShapeMismatch("shifted propagators must carry distinct single externals")
    return FivePinchShape(ordered[0], ordered[1], coupled[0], (e1[0], e2[0]))


def five_pinch_coordinates(diagram: Diagram, sol: PinchSolution, values=None):
    """(alpha1, beta1, alpha2, beta2) of Q_a = alpha_a p + beta_a p' in the pinch solution."""
    shape = five_pinch_shape(diagram, sol.subset)
    if values is None:
        values = _explicit_values(sol)
    e1, e2 = shape.externals
    out = []
    for a in (0, 1):
        span = sol.span_map.get(a, ())
        if set(span) != {e1, e2}:
            raise ShapeMismatch(f"loop {a + 1} must span {e1} and {e2}")
        out.extend([values[alpha_symbol(a, e1)], values[alpha_symbol(a, e2)]])
    return tuple(out)


def five_pinch_matrix(diagram: Diagram, sol: PinchSolution, last_column=None, values=None):
    """The 5x5 block matrix in coefficient coordinates of (p, p').

    Row order: q1, q1+p, q2, q2+p', coupled.  The last column defaults to
    D_i(Q).  Loop-2 momenta in the coupled row are written as in the diagram.
    """
    shape = five_pinch_shape(diagram, sol.subset)
    if values is None:
        values = _explicit_values(sol)
    e1, e2 = shape.externals
    q = _pinch_momenta(diagram, sol, values)
    order = [shape.q1[0], shape.q1[1], shape.q2[0], shape.q2[1], shape.coupled]
    if last_column is None:
        last_column = [expand_propagator(diagram, i, q) for i in order]
    rows = []
    for i, a_i in zip(order, last_column):
        k = propagator_momentum(diagram, i, q)
        coeff = dict(k.external_coeffs)
        vec = [coeff.get(e1, RatFunc.const(0)), coeff.get(e2, RatFunc.const(0))]
        prop = diagram.propagators[i]
        row = []
        for a in (0, 1):
            row.extend(vec if prop.routing[a] else [RatFunc.const(0), RatFunc.const(0)])
        row.append(a_i)
        rows.append(row)
    return rows, order


def delta_sq(diagram: Diagram, e1: str, e2: str) -> RatFunc:
    """(p.p')^2 - p^2 p'^2, the negated Euclidean Gram determinant."""
    return diagram.dot_ext(e1, e2) ** 2 - diagram.dot_ext(e1, e1) * diagram.dot_ext(e2, e2)


def sigma_rho(coords, convention: str = "consistent"):
    """Coefficients of Q2 = s1 p + r1 Q1 and of the second relation.

    ``stated``: Q1 = s2 p' + r2 Q2.  ``consistent``: Q1 + p = (s2 + 1) p' + r2 Q2,
    the form for which the closed determinant expansion holds identically.
    """
    a1, b1, a2, b2 = coords
    r1 = b2 / b1
    s1 = a2 - r1 * a1
    if convention == "stated":
        r2 = a1 / a2
        s2 = b1 - r2 * b2
    elif convention == "consistent":
        r2 = (a1 + 1) / a2
        s2 = b1 - 1 - r2 * b2
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return s1, r1, s2, r2


def five_pinch_closed_form(coords, last_column, dsq, convention: str = "consistent"):
    """b1 a2 Delta^2 (a5 - a2 - a4 - s1(a2 - a1) - r1 a1 - s2(a4 - a3) - r2 a3)."""
    a1c, b1, a2c, b2 = coords
    s1, r1, s2, r2 = sigma_rho(coords, convention)
    x1, x2, x3, x4, x5 = last_column
    inner = x5 - x2 - x4 - s1 * (x2 - x1) - r1 * x1 - s2 * (x4 - x3) - r2 * x3
    return b1 * a2c * dsq * inner


def five_pinch_expansion(diagram: Diagram, sol: PinchSolution, last_column=None, values=None):
    """Block determinant in orthonormal coordinates: det(coefficient matrix) * Gram."""
    shape = five_pinch_shape(diagram, sol.subset)
    rows, _ = five_pinch_matrix(diagram, sol, last_column, values)
    value = det_column_expansion([r[4] for r in rows], [r[:4] for r in rows], position=4)
    return value * (-delta_sq(diagram, *shape.externals))


def qed_s_values(diagram: Diagram, e1: str, e2: str):
    """s_{1,2} = (-p.p' +- sqrt(G)) / p'^2 with G = (p.p')^2 - p^2 p'^2, as the + and - branches."""
    root = sqrt_of(delta_sq(diagram, e1, e2))
    s12 = diagram.dot_ext(e1, e2)
    s22 = diagram.dot_ext(e2, e2)
    plus = (root - s12) / s22
    minus = (-root - s12) / s22
    return plus, minus


def qed_target(diagram: Diagram, e1: str, e2: str, mass_sq: RatFunc, signs: tuple[int, int]):
    """(alpha1(p + s1 p') + alpha2(p + s2 p') + p)^2 + m^2 with alpha_i from the on-shell conditions."""
    plus, minus = qed_s_values(diagram, e1, e2)
    s = [plus if sg > 0 else minus for sg in signs]
    s11 = diagram.dot_ext(e1, e1)
    s12 = diagram.dot_ext(e1, e2)
    s22 = diagram.dot_ext(e2, e2)
    alpha1 = -(s11 + mass_sq) / ((s11 + s[0] * s12) * 2)
    alpha2 = -(s22 + mass_sq) / ((s12 + s[1] * s22) * 2)
    c1 = alpha1 + alpha2 + 1
    c2 = alpha1 * s[0] + alpha2 * s[1]
    return c1 * c1 * s11 + c1 * c2 * s12 * 2 + c2 * c2 * s22 + mass_sq


def _sign_label(diagram: Diagram, coords, e1: str, e2: str) -> tuple[int, int]:
    plus, minus = qed_s_values(diagram, e1, e2)
    out = []
    for alpha, beta in ((coords[0], coords[1]), (coords[2], coords[3])):
        ratio = beta / alpha
        if ratio == plus:
            out.append(1)
        elif ratio == minus:
            out.append(-1)
        else:
            raise UnsupportedPinch("pinch coordinates do not lie on a null direction of the span")
    return tuple(out)


def five_pinch_det(diagram: Diagram, sol: PinchSolution) -> LandauPolynomial:
    """Five-pinch Landau polynomial from the block determinant with last column D_i(Q).

    With explicit (single radicand) pinch coordinates the (+, +) branch of the
    parameters is returned; :func:`five_pinch_branches` gives all four.
    Otherwise the determinant stays in parameter form; its quotient by the
    pinch residual is recorded.
    """
    _require_finite(sol)
    five_pinch_shape(diagram, sol.subset)
    if single_radicand(sol):
        return five_pinch_branches(diagram, sol)[0]
    value = RatFunc.lift(five_pinch_expansion(diagram, sol))
    note = "block determinant in orthonormal coordinates; overall factor not reconstructed; parameter form"
    return LandauPolynomial(value, sol.subset, note, method="five-pinch determinant (parameter form)",
                            quotient=_quotient(value, RatFunc.lift(sol.residual)))


def five_pinch_branches(diagram: Diagram, sol: PinchSolution) -> list[LandauPolynomial]:
    """One determinant per parameter branch, labelled by the signs of s_{1,2}.

    Each record carries the quotient against the null-direction target
    (alpha1(p + s1 p') + alpha2(p + s2 p') + p)^2 + m^2 of the same branch.
    """
    _require_finite(sol)
    shape = five_pinch_shape(diagram, sol.subset)
    if len(sol.params) != 2 or not single_radicand(sol):
        raise UnsupportedPinch("branch split needs explicit pinch coordinates with one radicand")
    e1, e2 = shape.externals
    mass = diagram.propagators[shape.coupled].mass_sq
    out = []
    for br in itertools.product((1, -1), repeat=2):
        values = _explicit_values(sol, br)
        coords = five_pinch_coordinates(diagram, sol, values)
        label = _sign_label(diagram, coords, e1, e2)
        value = five_pinch_expansion(diagram, sol, values=values)
        target = qed_target(diagram, e1, e2, mass, label)
        out.append(LandauPolynomial(
            value, sol.subset,
            "block determinant in orthonormal coordinates; overall factor not reconstructed",
            branch=label, method="five-pinch determinant", quotient=_quotient(value, target),
        ))
    out.sort(key=lambda lp: tuple(-x for x in lp.branch))
    return out
