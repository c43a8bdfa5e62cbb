"""Leading asymptotics near a Landau stratum.

After the residues in the parallel directions, the integrand near a finite
pinch takes the form 1 / (E + Q(q_perp)) times the spectator propagators,
with E linear in the deformation parameter.  The transverse integral then
scales as E^nu with nu = n_perp / 2 - 1 and n_perp = d * (#loops involved) - r,
r being the number of residues taken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .diagram import Diagram, MomentumExpr, expand_propagator, propagator_momentum, transverse_symbol
from .errors import NormalFormFailure, NotOneLoopSubset, SingularLinearPart
from .exactalg import Poly, QuadExt, RatFunc, det, format_value
from .exactalg.linalg import det_column_expansion
from .exactalg.poly import NotDivisible
from .landau import (
    LandauPolynomial,
    _explicit_values,
    _one_loop_frame,
    _pinch_momenta,
    _require_finite,
    frame_volume,
    gradient_rows,
    landau_from_pinch,
    single_radicand,
)
from .pinch import PinchSolution, normalized_routing

EPS = "eps"


# -- exponent bookkeeping ------------------------------------------------------

@dataclass(frozen=True)
class Exponent:
    """nu = (d * loops - rank) / 2 - 1, kept symbolic in d unless d is given."""

    loops: int
    rank: int
    d: int | None = None

    @property
    def d_coeff(self) -> Fraction:
        return Fraction(self.loops, 2)

    @property
    def constant(self) -> Fraction:
        return Fraction(-self.rank, 2) - 1

    def at(self, d: int | Fraction) -> Fraction:
        return self.d_coeff * d + self.constant

    @property
    def value(self) -> Fraction | None:
        return None if self.d is None else self.at(self.d)

    def n_perp(self) -> str:
        if self.d is not None:
            return str(self.d * self.loops - self.rank)
        lead = "d" if self.loops == 1 else f"{self.loops}*d"
        return f"{lead}-{self.rank}" if self.rank else lead

    def __str__(self) -> str:
        if self.d is not None:
            return _frac(self.at(self.d))
        if self.loops == 1:
            return f"-1+(d-{self.rank})/2" if self.rank else "-1+d/2"
        return _linear_in_d(self.d_coeff, self.constant)


def _frac(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _linear_in_d(a: Fraction, b: Fraction) -> str:
    if a.denominator == 1:
        lead = "d" if a == 1 else f"{a.numerator}*d"
    else:
        lead = f"{a.numerator}*d/{a.denominator}"
    if b == 0:
        return lead
    sign = "+" if b > 0 else "-"
    return f"{lead}{sign}{_frac(abs(b))}"


def alternative_exponent(subset_size: int, d: int | None) -> str:
    """The rule -1 + (d - 1)|I|/2, reported for comparison only."""
    if d is not None:
        return _frac(Fraction(-1) + Fraction((d - 1) * subset_size, 2))
    return f"-1+(d-1)*{subset_size}/2"


def sphere_volume(n: int | float) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n: 2 pi^(n/2) / Gamma(n/2)."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def morse_constant(n: int) -> float | None:
    """Coefficient c in int d^n y / (eps + y^2) = c eps^(n/2-1) + regular; None for even n (log case)."""
    if n % 2 == 0:
        return None
    return math.pi ** (n / 2) * math.gamma(1 - n / 2)


# -- residue reduction -----------------------------------------------------------

@dataclass(frozen=True)
class ResidueReduction:
    prefactor_power: int
    jacobian: object
    spectators: tuple[tuple[int, object], ...]
    denominator: object
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "prefactor_power": self.prefactor_power,
            "jacobian": format_value(self.jacobian),
            "spectators": {str(j): format_value(v) for j, v in self.spectators},
            "denominator": format_value(self.denominator),
            "notes": list(self.notes),
        }


def _parallel_dim(sol: PinchSolution) -> int:
    return sum(len(sol.span_map[a]) for a in sol.involved_loops)


def _values(sol: PinchSolution):
    if single_radicand(sol) and sol.params:
        return _explicit_values(sol, (1,) * len(sol.params))
    return _explicit_values(sol)


def _transverse_point(diagram: Diagram, sol: PinchSolution, values, with_perp: bool) -> list[MomentumExpr]:
    q = _pinch_momenta(diagram, sol, values)
    out = []
    for a in range(diagram.loops):
        if a in sol.span_map:
            out.append(q[a] + MomentumExpr.transverse(a) if with_perp else q[a])
        else:
            out.append(MomentumExpr.loop(a))
    return out


def spectator_values(diagram: Diagram, sol: PinchSolution, values=None, with_perp: bool = False):
    """D_j at q_par = Q for j outside the subset.

    Loops outside the pinch stay as full loop momenta.  Transverse parts are
    kept only when ``with_perp`` is set and no such loop enters D_j.
    """
    values = _values(sol) if values is None else values
    out = []
    for j in range(len(diagram.propagators)):
        if j in sol.subset:
            continue
        loops = diagram.propagators[j].loops()
        keep = with_perp and all(a in sol.span_map for a in loops)
        out.append((j, expand_propagator(diagram, j, _transverse_point(diagram, sol, values, keep))))
    return out


def theorem3_dets(diagram: Diagram, sol: PinchSolution) -> dict:
    """Determinants E = det[c_i eps, l_i] and Q = det[Q_i(q_perp), l_i].

    c_i = D_i(Q) and l_i is the gradient of D_i along the parallel space in
    orthonormal coordinates; Q_i is the transverse quadratic part of D_i.
    """
    _require_finite(sol)
    values = _values(sol)
    rows = gradient_rows(diagram, sol, values)
    k = _parallel_dim(sol)
    if len(rows) != k + 1:
        bad = sol.subset[k + 1] if len(rows) > k + 1 else None
        raise NormalFormFailure(
            f"{len(rows)} propagators against {k} parallel directions"
            + (f"; propagator {bad} has no independent linear part" if bad is not None else "")
        )
    vol = frame_volume(sol, diagram)
    c = [r[0] for r in rows]
    grads = [r[1:] for r in rows]
    eps = RatFunc.var(EPS)
    E = det_column_expansion([ci * eps for ci in c], grads) / vol
    quad_parts = []
    perp = [MomentumExpr.make()] * diagram.loops
    for a in sol.involved_loops:
        perp[a] = MomentumExpr.transverse(a)
    for i in sol.subset:
        prop = diagram.propagators[i]
        m = MomentumExpr.make()
        for a, la in enumerate(prop.routing):
            if la and a in sol.span_map:
                m = m + perp[a].scale(la)
        quad_parts.append(m.sq(diagram))
    Q = det_column_expansion(quad_parts, grads) / vol
    scale = det_column_expansion([RatFunc.const(1)] * len(grads), grads) / vol
    loops = list(sol.involved_loops)
    form = []
    Qrf = Q
    for a in loops:
        row = []
        for b in loops:
            sym = transverse_symbol(a, b)
            coeff = _coeff_of(Qrf, sym)
            row.append(coeff if a == b else coeff * Fraction(1, 2))
        form.append(row)
    return {"E": E, "Q": Q, "c": c, "l": grads, "scale": scale, "quad_form": form, "loops": loops}


def _coeff_of(x, sym: str):
    """Coefficient of a (linear) symbol in a RatFunc or QuadExt."""
    if isinstance(x, QuadExt):
        return QuadExt(_coeff_of(x.a, sym), _coeff_of(x.b, sym), x.radicand)
    x = RatFunc.lift(x)
    return RatFunc.lift(x.num.coeff(sym, 1)) / RatFunc.lift(x.den)


def residue_reduce(diagram: Diagram, sol: PinchSolution) -> ResidueReduction:
    """Post-residue integrand: spectators at q_par = Q and the combined denominator E + Q(q_perp)."""
    _require_finite(sol)
    values = _values(sol)
    rows = gradient_rows(diagram, sol, values)
    grads = [r[1:] for r in rows]
    k = _parallel_dim(sol)
    notes = []
    if k:
        lin = det([g for g in grads[1 : k + 1]])
        if lin == 0 or (hasattr(lin, "is_zero") and lin.is_zero()):
            raise SingularLinearPart("the gradients of the substituted propagators are linearly dependent")
        jac = frame_volume(sol, diagram) / lin
    else:
        jac = RatFunc.const(1)
    dets = theorem3_dets(diagram, sol)
    spect = spectator_values(diagram, sol, values, with_perp=True)
    if any(not all(a in sol.span_map for a in diagram.propagators[j].loops()) for j, _ in spect):
        notes.append("spectators with loops outside the pinch are taken at q_perp = 0")
    return ResidueReduction(sol.parallel_rank, jac, tuple(spect), dets["E"] + dets["Q"], tuple(notes))


# -- one-loop M_I decomposition --------------------------------------------------

@dataclass(frozen=True)
class MIDecomposition:
    volume_factor: object
    psi: object
    remainder: object
    psi_coordinate: RatFunc | None = None
    quotient: RatFunc | None = None
    k: int = 0
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        def f(x):
            return None if x is None else format_value(x)

        return {
            "volume_factor": f(self.volume_factor),
            "psi": f(self.psi),
            "remainder": f(self.remainder),
            "quotient": f(self.quotient),
            "k": self.k,
            "flags": list(self.flags),
        }


def mi_decompose(diagram: Diagram, sol: PinchSolution, landau: LandauPolynomial | None = None) -> MIDecomposition:
    """Split M_I = det[2(Q + v_i), q_perp^2 + D_i(Q)] as 2^k [v_1..v_k] q_perp^2 + psi.

    Rows run over the subset with v_0 = 0.  Vectors are in coefficient
    coordinates of the span; the orthonormal value is that times sqrt(Gram).
    The bracket carries the sign (-1)^k from expanding along the last column.
    """
    v = _one_loop_frame(diagram, sol.subset)
    (a,) = sol.involved_loops if len(sol.involved_loops) == 1 else (None,)
    if a is None:
        raise NotOneLoopSubset("M_I decomposition needs a one-loop subset")
    names = sol.span_map[a]
    k = len(v) - 1
    coef_rows = [[RatFunc.lift(dict(x.external_coeffs).get(e, 0)) for e in names] for x in v[1:]]
    if len(names) != k:
        raise NotOneLoopSubset(f"{k + 1} propagators span {len(names)} directions")
    vdet = det(coef_rows) if k else RatFunc.const(1)
    gram = sol.gram_dets[0][1]
    if gram.is_zero() or (hasattr(vdet, "is_zero") and vdet.is_zero()):
        return MIDecomposition(RatFunc.const(0), None, None, k=k, flags=("collapsed volume",))
    _require_finite(sol)
    sqrt_g = frame_volume(sol, diagram)
    bracket = sqrt_g * vdet * (-1) ** k
    values = _values(sol)
    q = _pinch_momenta(diagram, sol, values)
    Qpos = []
    for i in sol.subset:
        sign = normalized_routing(diagram.propagators[i].routing)[1]
        Qpos.append(propagator_momentum(diagram, i, q).scale(sign))
    d_at = [expand_propagator(diagram, i, q) for i in sol.subset]
    qsq = RatFunc.var(transverse_symbol(a))
    two = Fraction(2)
    pos_rows = [[RatFunc.lift(dict(x.external_coeffs).get(e, 0)) * two for e in names] for x in Qpos]
    M_coef = det_column_expansion([qsq + di for di in d_at], pos_rows, position=k)
    psi_coef = det_column_expansion(d_at, pos_rows, position=k)
    M = M_coef * sqrt_g
    psi = psi_coef * sqrt_g
    remainder = M - bracket * qsq * (2**k) - psi
    if landau is None:
        landau = landau_from_pinch(sol)
    quotient = None
    flags = []
    psi_rf = RatFunc.lift(psi_coef)
    try:
        poly_q = psi_rf.num.divexact(landau.poly)
        quotient = RatFunc.lift(poly_q) / RatFunc.lift(psi_rf.den)
    except (NotDivisible, TypeError):
        flags.append("psi is not divisible by the Landau polynomial")
    return MIDecomposition(bracket, psi, remainder, psi_rf, quotient, k, tuple(flags))


# -- leading term ------------------------------------------------------------------

@dataclass
class AsymptoticExpansion:
    subset: tuple[int, ...]
    exponent: Exponent
    residue_count: int
    prefactor_power: int
    quad_form: list
    leading: dict
    landau: LandauPolynomial | None
    warnings: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "subset": list(self.subset),
            "exponent": str(self.exponent),
            "n_perp": self.exponent.n_perp(),
            "prefactor_power": self.prefactor_power,
            "residue_count": self.residue_count,
            "quad_form": [[format_value(x) for x in row] for row in self.quad_form],
            "leading": self.leading,
            "landau_ref": self.landau.to_dict() if self.landau is not None else None,
            "warnings": list(self.warnings),
            "flags": list(self.flags),
        }


def exponent_for(sol: PinchSolution, d: int | None = None) -> Exponent:
    return Exponent(len(sol.involved_loops), sol.parallel_rank, d)


def leading_coefficient(diagram: Diagram, sol: PinchSolution, d: int | str | None = None,
                        landau: LandauPolynomial | None = None) -> AsymptoticExpansion:
    """Exponent, prefactor power and leading coefficient for a finite pinch."""
    _require_finite(sol)
    d_val = None if d is None or d == "d" else int(d)
    nu = exponent_for(sol, d_val)
    dets = theorem3_dets(diagram, sol)
    values = _values(sol)
    spect = spectator_values(diagram, sol, values, with_perp=False)
    loops_out = [j for j, _ in spect if not all(a in sol.span_map for a in diagram.propagators[j].loops())]
    leading: dict = {"prefactor": f"(2*pi*i)^{sol.parallel_rank}"}
    form = dets["quad_form"]
    form_det = det(form)
    leading["quad_det"] = format_value(form_det)
    leading["scale"] = format_value(dets["scale"])
    n_loops = len(sol.involved_loops)
    leading["sphere_volume"] = f"V(n-1) with n = {nu.n_perp()}"
    leading["transverse_det"] = f"({format_value(form_det)})^(({nu.n_perp()})/{n_loops})"
    if d_val is not None:
        n = d_val * n_loops - sol.parallel_rank
        if n >= 1:
            leading["sphere_volume_value"] = sphere_volume(n)
            mc = morse_constant(n)
            if mc is not None:
                leading["morse_constant_value"] = mc
    if loops_out:
        leading["kind"] = "ResidualIntegrand"
        leading["residual_integrand"] = [format_value(v) for _, v in spect]
    else:
        prod = RatFunc.const(1)
        for _, v in spect:
            prod = prod * v
        leading["kind"] = "Closed"
        leading["spectator_product"] = "1/(" + format_value(prod) + ")" if spect else "1"
    warnings = [
        f"prefactor power is the residue count {sol.parallel_rank}; counting one residue per propagator would give {len(sol.subset)}",
        f"the rule -1+(d-1)|I|/2 would give {alternative_exponent(len(sol.subset), d_val)}; not used",
        "the Morse constant pi^(n/2)*Gamma(1-n/2) differs from the sphere volume V(n-1) by Gamma(n/2)*Gamma(1-n/2)/2",
    ]
    flags = []
    if nu.value is not None and nu.value == 0:
        flags.append("LogarithmicCandidate")
    if landau is None:
        landau = landau_from_pinch(sol)
    return AsymptoticExpansion(sol.subset, nu, sol.parallel_rank, sol.parallel_rank, form, leading, landau, warnings, flags)
