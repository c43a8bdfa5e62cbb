from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinchlab.diagram import (
    MomentumExpr,
    diagram_from_dict,
    expand_propagator,
    load_diagram,
    parse_diagram,
    resolve_path,
)
from pinchlab.errors import ReductionError, SchemaError, ShapeError, SymbolError
from pinchlab.exactalg import RatFunc

FIXTURES = ["bubble", "one_loop_vertex_k", "two_loop_propagator", "two_loop_crossed_vertex", "qed_crossed_vertex"]
V = RatFunc.var


def test_two_loop_propagator_routings(fixtures):
    dg = fixtures("two_loop_propagator")
    assert dg.loops == 2
    assert [list(p.routing) for p in dg.propagators] == [[1, 0], [1, 0], [1, 1], [0, 1], [0, 1]]


def test_bubble_accepted(fixtures):
    dg = fixtures("bubble")
    assert dg.loops == 1 and len(dg.propagators) == 2
    assert [dict(p.shift) for p in dg.propagators] == [{}, {"p": 1}]


def _doc(**over):
    doc = {
        "name": "t", "loops": 1, "externals": ["p"], "gram": {"p.p": "s"},
        "masses_sq": {"m0sq": "m0sq"},
        "propagators": [{"routing": [1], "shift": {}, "mass_sq": "m0sq"}],
    }
    doc.update(over)
    return doc


def test_schema_errors():
    with pytest.raises(SchemaError):
        diagram_from_dict(_doc(propagators=[]))
    bad = _doc()
    del bad["loops"]
    with pytest.raises(SchemaError):
        diagram_from_dict(bad)
    with pytest.raises(ShapeError):
        diagram_from_dict(_doc(propagators=[{"routing": [1, 0], "mass_sq": 0}]))
    with pytest.raises(SymbolError):
        diagram_from_dict(_doc(gram={"p.p": "s"}, propagators=[{"routing": [1], "mass_sq": "mystery"}]))
    with pytest.raises(SymbolError):
        diagram_from_dict(_doc(propagators=[{"routing": [1], "shift": {"k": "1"}}]))


def test_missing_file():
    with pytest.raises(SchemaError):
        resolve_path("no_such_diagram")


def test_fixture_env_override(tmp_path, monkeypatch):
    (tmp_path / "mine.json").write_text(json.dumps(_doc(name="mine")))
    monkeypatch.setenv("PINCHLAB_FIXTURES", str(tmp_path))
    assert load_diagram("mine").name == "mine"


@pytest.mark.parametrize("name", FIXTURES)
def test_roundtrip(fixtures, name):
    dg = fixtures(name)
    again = parse_diagram(dg.to_json())
    assert again == dg
    assert again.to_json() == dg.to_json()


def test_toml_accepted():
    text = """
name = "bubble_toml"
loops = 1
externals = ["p"]
[gram]
"p.p" = "s"
[masses_sq]
m0sq = 1
[[propagators]]
routing = [1]
mass_sq = "m0sq"
[[propagators]]
routing = [1]
shift = {p = "1"}
mass_sq = "m0sq"
"""
    dg = parse_diagram(text, "toml")
    assert len(dg.propagators) == 2


def test_bubble_d0_transverse(fixtures):
    dg = fixtures("bubble")
    val = expand_propagator(dg, 0, [MomentumExpr.transverse(0)])
    assert val == V("qperp1sq") + 1


def test_two_loop_d2_at_alpha_p(fixtures):
    dg = fixtures("two_loop_propagator")
    al = V("al")
    q = [MomentumExpr.make(external={"p": al}), MomentumExpr.make()]
    assert expand_propagator(dg, 1, q) == (al + 1) ** 2 * V("s") + V("m2sq")


def test_parallel_plus_transverse(fixtures):
    """D_i at q = Q_par + q_perp splits into q_perp^2 + (Q_par + p_i)^2 + m_i^2."""
    dg = fixtures("one_loop_vertex_k")
    a1, a2 = V("a1"), V("a2")
    qpar = MomentumExpr.make(external={"p1": a1, "p2": a2})
    q = [qpar + MomentumExpr.transverse(0)]
    got = expand_propagator(dg, 1, q)
    k = qpar + MomentumExpr.make(external={"p1": 1})
    assert got == V("qperp1sq") + k.sq(dg) + V("m1sq")


def test_undeclared_gram_entry():
    dg = diagram_from_dict(_doc(externals=["p", "k"], gram={"p.p": "s"},
                                propagators=[{"routing": [1], "shift": {"p": "1", "k": "1"}}]))
    with pytest.raises(ReductionError):
        expand_propagator(dg, 0, [MomentumExpr.make()])


rats = st.fractions(min_value=-4, max_value=4, max_denominator=3)


@given(rats, rats, rats)
@settings(max_examples=30, deadline=None)
def test_expansion_quadratic_in_loop_coefficient(c, h, msq):
    """Second finite difference in the loop coefficient is constant; mass enters linearly."""
    doc = _doc(masses_sq={"m0sq": str(msq)}, propagators=[{"routing": [1], "shift": {"p": "1"}, "mass_sq": "m0sq"}])
    dg = diagram_from_dict(doc)
    f = lambda al: expand_propagator(dg, 0, [MomentumExpr.make(external={"p": RatFunc.const(al)})])
    h = h or Fraction(1)
    d2 = f(c + 2 * h) - f(c + h) * 2 + f(c)
    assert d2 == V("s") * 2 * h * h
    doc2 = _doc(masses_sq={"m0sq": str(msq + 1)}, propagators=doc["propagators"])
    g = expand_propagator(diagram_from_dict(doc2), 0, [MomentumExpr.make(external={"p": RatFunc.const(c)})])
    assert g - f(c) == 1


def test_gram_psd_report(fixtures):
    assert fixtures("bubble").gram_psd({"s": 2}) is True
    assert fixtures("bubble").gram_psd({"s": -2}) is False
    assert fixtures("bubble").gram_psd() is None
