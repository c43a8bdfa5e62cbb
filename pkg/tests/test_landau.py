from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinchlab.diagram import diagram_from_dict
from pinchlab.errors import NotFinite, NotOneLoopSubset, ShapeMismatch
from pinchlab.exactalg import Poly, QuadExt, RatFunc
from pinchlab.landau import (
    bordered_gram_det,
    five_pinch_det,
    landau_from_pinch,
    theorem4_normalized,
)
from pinchlab.pinch import Classification, solve_pinch

V = RatFunc.var


def bubble(m0="m0sq", m1="m1sq"):
    masses = {k: k for k in {m0, m1} if not k.lstrip("-").isdigit()}
    return diagram_from_dict({
        "loops": 1, "externals": ["p"], "gram": {"p.p": "s"}, "masses_sq": masses,
        "propagators": [{"routing": [1], "mass_sq": m0},
                        {"routing": [1], "shift": {"p": "1"}, "mass_sq": m1}],
    })


def _squares(rng, n):
    out = []
    while len(out) < n:
        a, b = (Fraction(rng.randint(1, 9), rng.randint(1, 4)) for _ in range(2))
        if a != b:
            out.append((a, b))
    return out


@pytest.mark.parametrize("m1,m2", [(1, 2), (3, 5)])
def test_two_loop_locus(fixtures, m1, m2):
    lp = landau_from_pinch(solve_pinch(fixtures("two_loop_propagator"), (0, 1)))
    for s in (-(m1 + m2) ** 2, -(m1 - m2) ** 2):
        assert lp.poly.evaluate({"s": s, "m1sq": m1 * m1, "m2sq": m2 * m2}) == 0
    assert lp.poly.evaluate({"s": 1, "m1sq": m1 * m1, "m2sq": m2 * m2}) != 0


def test_degree_bound_in_s(fixtures):
    lp = landau_from_pinch(solve_pinch(fixtures("two_loop_propagator"), (0, 1)))
    assert lp.poly.degree("s") == 2


def test_crossed_vertex_two_pinch_form(fixtures):
    """(a+1)(a^2 p^2 + m1^2) - a((a+1)^2 p^2 + m2^2) at the pinch a is a multiple of L."""
    sol = solve_pinch(fixtures("two_loop_crossed_vertex"), (0, 1))
    a = sol.alpha_map()[0]["p1"]
    s, m1, m2 = V("s11"), V("m1sq"), V("m2sq")
    paper_l = (a + 1) * (a * a * s + m1) - a * ((a + 1) ** 2 * s + m2)
    lp = landau_from_pinch(sol)
    q = paper_l.num.divexact(lp.poly)
    assert q.is_const() and not q.is_zero()


def test_massless_bubble_proportional_to_s():
    lp = landau_from_pinch(solve_pinch(bubble("0", "0"), (0, 1)))
    assert lp.poly == Poly.var("s")


def test_not_finite_rejected(fixtures):
    sol = solve_pinch(fixtures("two_loop_propagator"), (0, 2))
    with pytest.raises(NotFinite):
        landau_from_pinch(sol)
    with pytest.raises(NotFinite):
        theorem4_normalized(fixtures("two_loop_propagator"), sol)


def test_bordered_equal_mass_threshold():
    det = bordered_gram_det(bubble("m0sq", "m0sq"), (0, 1))
    for m in (Fraction(1), Fraction(9, 4), Fraction(5)):
        assert det.evaluate({"s": -4 * m, "m0sq": m}) == 0


def test_bordered_degenerate_gram(fixtures):
    doc = dict(fixtures("one_loop_vertex_k").raw)
    doc["externals"] = ["p1", "p2"]
    doc["gram"] = {"p1.p1": "s", "p1.p2": "2*s", "p2.p2": "4*s"}
    doc["propagators"] = doc["propagators"][:3]
    dg = diagram_from_dict(doc)
    assert solve_pinch(dg, (0, 1, 2)).classification is Classification.AT_INFINITY
    # singular Gram block: only the adjugate term survives, -s (c2 - 2 c1)^2 / 4
    s, m0, m1, m2 = V("s"), V("m0sq"), V("m1sq"), V("m2sq")
    c1, c2 = s + m1 - m0, s * 4 + m2 - m0
    det = bordered_gram_det(dg, (0, 1, 2))
    assert det == -s * (c2 - c1 * 2) ** 2 / 4
    # identically zero once the mass data are aligned with p2 = 2 p1 as well
    assert det.subs({"m2sq": m1 * 2 - m0 - s * 2}).is_zero()


def test_bordered_rejects_multi_loop(fixtures):
    with pytest.raises(NotOneLoopSubset):
        bordered_gram_det(fixtures("two_loop_crossed_vertex"), (0, 4))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_bordered_matches_pinch_locus(fixtures, k):
    dg = fixtures("one_loop_vertex_k")
    subset = tuple(range(k + 1))
    lp = landau_from_pinch(solve_pinch(dg, subset))
    q = bordered_gram_det(dg, subset) / RatFunc.lift(lp.poly)
    # a nonzero multiple with no kinematic dependence: the loci coincide
    assert q.is_const() and not q.is_zero()


def test_theorem4_bubble_threshold():
    dg = bubble("m0sq", "m0sq")
    lp = theorem4_normalized(dg, solve_pinch(dg, (0, 1)))
    assert isinstance(lp.poly, QuadExt)
    for m in (1, 4, 9):
        for branch in (1, -1):
            assert abs(lp.evaluate({"s": -4 * m, "m0sq": m}, branch)) < 1e-12
    assert abs(lp.evaluate({"s": 3, "m0sq": 1})) > 1e-3


def test_theorem4_quotient_nonzero(fixtures):
    dg = fixtures("two_loop_propagator")
    lp = theorem4_normalized(dg, solve_pinch(dg, (0, 1)))
    assert lp.quotient is not None and not lp.quotient.is_zero()
    # the quotient carries no mass dependence
    assert not ({"m1sq", "m2sq"} & set(lp.quotient.variables()))


def test_theorem4_single_propagator(fixtures):
    dg = fixtures("two_loop_propagator")
    sol = solve_pinch(dg, (0,))
    lp = theorem4_normalized(dg, sol)
    assert lp.poly == sol.residual == V("m1sq")


def test_five_pinch_shape_mismatch(fixtures):
    dg = fixtures("two_loop_crossed_vertex")
    with pytest.raises(ShapeMismatch):
        five_pinch_det(dg, solve_pinch(dg, (0, 1)))


def test_base_choice_only_rescales(fixtures):
    dg = fixtures("one_loop_vertex_k")
    a = landau_from_pinch(solve_pinch(dg, (0, 1, 2)))
    b = landau_from_pinch(solve_pinch(dg, (0, 1, 2), base=2))
    q = RatFunc.lift(a.poly) / RatFunc.lift(b.poly)
    assert q.is_const() and not q.is_zero()


def test_mass_symmetry():
    a = landau_from_pinch(solve_pinch(bubble("m0sq", "m1sq"), (0, 1)))
    b = landau_from_pinch(solve_pinch(bubble("m1sq", "m0sq"), (0, 1)))
    q = RatFunc.lift(a.poly) / RatFunc.lift(b.poly)
    assert q.is_const() and not q.is_zero()


def test_locus_agreement_random_instances():
    dg = bubble()
    sol = solve_pinch(dg, (0, 1))
    lfp, bord, thm4 = landau_from_pinch(sol), bordered_gram_det(dg, (0, 1)), theorem4_normalized(dg, sol)
    rng = random.Random(17)
    for m0, m1 in _squares(rng, 20):
        for s in (-(m0 + m1) ** 2, -(m0 - m1) ** 2):
            pt = {"s": s, "m0sq": m0 * m0, "m1sq": m1 * m1}
            assert lfp.poly.evaluate(pt) == 0
            assert bord.evaluate(pt) == 0
            assert min(abs(thm4.evaluate(pt, b)) for b in (1, -1)) < 1e-9
        generic = {"s": Fraction(rng.randint(1, 50), 7), "m0sq": m0 * m0, "m1sq": m1 * m1}
        assert lfp.poly.evaluate(generic) != 0 and bord.evaluate(generic) != 0


def test_serialization(fixtures):
    d = landau_from_pinch(solve_pinch(fixtures("bubble"), (0, 1))).to_dict()
    assert d["poly"] == "s + 4" and d["branch"] is None
    assert set(d) >= {"subset", "poly", "normalization", "branch"}


lam = st.fractions(min_value=Fraction(1, 3), max_value=3, max_denominator=3)


@given(lam)
@settings(max_examples=20, deadline=None)
def test_landau_homogeneous(lmb):
    """s, m^2 -> lambda^2 (s, m^2) rescales L by lambda^(2 deg)."""
    from pinchlab.diagram import load_diagram

    lp = landau_from_pinch(solve_pinch(load_diagram("two_loop_propagator"), (0, 1)))
    pt = {"s": Fraction(-3), "m1sq": Fraction(2), "m2sq": Fraction(7)}
    scaled = {k: v * lmb * lmb for k, v in pt.items()}
    assert lp.poly.evaluate(scaled) == lp.poly.evaluate(pt) * lmb ** (2 * lp.poly.degree())
