"""Loop-integral data model: propagators, routing, external Gram data.

External momenta are never given as component vectors.  Every dot product is
reduced through the declared Gram entries, and loop momenta split into a part
along the externals plus a transverse part orthogonal to all of them.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ReductionError, SchemaError, ShapeError, SymbolError
from .exactalg import RatFunc, format_value, parse_expr
from .exactalg.ratfunc import ZERO_RF

FIXTURE_ENV = "PINCHLAB_FIXTURES"
_PACKAGE_FIXTURES = Path(__file__).with_name("fixtures")


def transverse_symbol(a: int, b: int | None = None) -> str:
    """q_{a,perp}^2 or q_{a,perp}.q_{b,perp}; loop indices are 0-based, names 1-based."""
    if b is None or a == b:
        return f"qperp{a + 1}sq"
    a, b = sorted((a, b))
    return f"qperp{a + 1}_qperp{b + 1}"


def loop_symbol(a: int, other: int | str | None = None) -> str:
    """Symbols for unreduced loop momenta: q_a^2, q_a.q_b, q_a.p_e."""
    if other is None or other == a:
        return f"q{a + 1}sq"
    if isinstance(other, str):
        return f"q{a + 1}_{other}"
    a, b = sorted((a, other))
    return f"q{a + 1}_q{b + 1}"


@dataclass(frozen=True)
class Propagator:
    routing: tuple[int, ...]
    shift: tuple[tuple[str, Fraction], ...]
    mass_sq: RatFunc
    mass_label: str = ""

    @property
    def shift_map(self) -> dict[str, Fraction]:
        return dict(self.shift)

    def loops(self) -> tuple[int, ...]:
        return tuple(a for a, l in enumerate(self.routing) if l)


@dataclass(frozen=True)
class Diagram:
    name: str
    loops: int
    dimension: int | str
    externals: tuple[str, ...]
    gram: tuple[tuple[tuple[str, str], RatFunc], ...]
    masses: tuple[tuple[str, RatFunc], ...]
    propagators: tuple[Propagator, ...]
    raw: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def gram_map(self) -> dict[tuple[str, str], RatFunc]:
        return dict(self.gram)

    def dot_ext(self, a: str, b: str) -> RatFunc:
        key = tuple(sorted((a, b)))
        g = self.gram_map
        if key not in g:
            raise ReductionError(f"Gram entry {a}.{b} is not declared")
        return g[key]

    def gram_matrix(self, names: Sequence[str]) -> list[list[RatFunc]]:
        return [[self.dot_ext(a, b) for b in names] for a in names]

    def invariant_symbols(self) -> tuple[str, ...]:
        names: set[str] = set()
        for _, v in self.gram:
            names.update(v.variables())
        for _, v in self.masses:
            names.update(v.variables())
        for p in self.propagators:
            names.update(p.mass_sq.variables())
        return tuple(sorted(names))

    def gram_psd(self, values: Mapping[str, float] | None = None) -> bool | None:
        """PSD check of the external Gram matrix when it is numeric (reported, not enforced)."""
        import numpy as np

        try:
            G = [[float(x.evaluate(values or {})) for x in row] for row in self.gram_matrix(self.externals)]
        except (KeyError, ReductionError, ZeroDivisionError):
            return None
        if not G:
            return True
        return bool(np.linalg.eigvalsh(np.array(G)).min() >= -1e-12)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "loops": self.loops,
            "dimension": self.dimension,
            "externals": list(self.externals),
            "gram": {f"{a}.{b}": format_value(v) for (a, b), v in self.gram},
            "masses_sq": {k: format_value(v) for k, v in self.masses},
            "propagators": [
                {
                    "routing": list(p.routing),
                    "shift": {e: _fmt_frac(c) for e, c in p.shift},
                    "mass_sq": p.mass_label or format_value(p.mass_sq),
                }
                for p in self.propagators
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _fmt_frac(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _require(doc: Mapping, key: str):
    if key not in doc:
        raise SchemaError(f"missing field {key!r}")
    return doc[key]


def _scalar(value, allowed=None) -> RatFunc:
    if isinstance(value, bool):
        raise SchemaError("booleans are not valid invariants")
    if isinstance(value, int):
        return RatFunc.const(value)
    if isinstance(value, float):
        return RatFunc.const(Fraction(repr(value)))
    if isinstance(value, str):
        v = parse_expr(value, allowed)
        if not isinstance(v, RatFunc):
            raise SchemaError(f"square roots are not allowed in diagram data: {value!r}")
        return v
    raise SchemaError(f"cannot read invariant value {value!r}")


def _names_in(value) -> set[str]:
    if isinstance(value, str):
        return set(parse_expr(value).variables())
    return set()


def diagram_from_dict(doc: Mapping) -> Diagram:
    if not isinstance(doc, Mapping):
        raise SchemaError("diagram document must be a mapping")
    name = str(doc.get("name", "diagram"))
    loops = _require(doc, "loops")
    if not isinstance(loops, int) or isinstance(loops, bool) or loops < 1:
        raise SchemaError("loops must be an integer >= 1")
    dimension = doc.get("dimension", "d")
    if not (dimension == "d" or (isinstance(dimension, int) and not isinstance(dimension, bool) and dimension > 0)):
        raise SchemaError("dimension must be a positive integer or 'd'")
    externals = tuple(_require(doc, "externals"))
    if len(set(externals)) != len(externals) or not all(isinstance(e, str) and e.isidentifier() for e in externals):
        raise SchemaError("externals must be distinct identifiers")
    gram_doc = doc.get("gram", {})
    masses_doc = doc.get("masses_sq", {})
    props_doc = _require(doc, "propagators")
    if not isinstance(props_doc, list) or not props_doc:
        raise SchemaError("propagators must be a non-empty list")

    # every identifier appearing in gram / masses_sq values is a declared invariant
    declared: set[str] = set()
    for v in list(gram_doc.values()) + list(masses_doc.values()):
        declared |= _names_in(v)
    declared |= set(masses_doc)

    gram: dict[tuple[str, str], RatFunc] = {}
    for key, v in gram_doc.items():
        parts = key.split(".")
        if len(parts) != 2 or any(p not in externals for p in parts):
            raise SchemaError(f"bad Gram key {key!r}")
        k = tuple(sorted(parts))
        val = _scalar(v, declared)
        if k in gram and gram[k] != val:
            raise SchemaError(f"Gram entry {key!r} given twice with different values")
        gram[k] = val

    masses: dict[str, RatFunc] = {}
    for k, v in masses_doc.items():
        if not k.isidentifier():
            raise SchemaError(f"bad mass symbol {k!r}")
        masses[k] = _scalar(v, declared)

    props = []
    for idx, pd in enumerate(props_doc):
        if not isinstance(pd, Mapping):
            raise SchemaError(f"propagator {idx} must be a mapping")
        routing = _require(pd, "routing")
        if not isinstance(routing, list) or len(routing) != loops:
            raise ShapeError(f"propagator {idx}: routing length must equal loops={loops}")
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in routing):
            raise ShapeError(f"propagator {idx}: routing entries must be integers")
        if not any(routing):
            raise ShapeError(f"propagator {idx}: routing is identically zero")
        shift = {}
        for e, c in (pd.get("shift") or {}).items():
            if e not in externals:
                raise SymbolError(f"propagator {idx}: unknown external {e!r}")
            try:
                fc = Fraction(str(c))
            except (ValueError, ZeroDivisionError):
                raise SchemaError(f"propagator {idx}: shift coefficient {c!r} is not rational") from None
            if fc:
                shift[e] = fc
        m = pd.get("mass_sq", 0)
        label = ""
        if isinstance(m, str) and m in masses:
            label, mval = m, masses[m]
        else:
            mval = _scalar(m, declared)
            label = m if isinstance(m, str) else ""
        props.append(Propagator(tuple(routing), tuple(sorted(shift.items())), mval, label))

    return Diagram(
        name=name,
        loops=loops,
        dimension=dimension,
        externals=externals,
        gram=tuple(sorted(gram.items())),
        masses=tuple(sorted(masses.items())),
        propagators=tuple(props),
        raw=dict(doc),
    )


def parse_diagram(text: str, fmt: str | None = None) -> Diagram:
    """Parse a JSON (default) or TOML diagram document."""
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "toml"
    try:
        if fmt == "json":
            doc = json.loads(text)
        else:
            try:
                import tomllib
            except ModuleNotFoundError:  # python < 3.11
                import tomli as tomllib
            doc = tomllib.loads(text)
    except ValueError as exc:
        raise SchemaError(f"cannot read diagram document: {exc}") from None
    return diagram_from_dict(doc)


def fixture_dirs() -> list[Path]:
    dirs = []
    if os.environ.get(FIXTURE_ENV):
        dirs.append(Path(os.environ[FIXTURE_ENV]))
    dirs.append(_PACKAGE_FIXTURES)
    return dirs


def resolve_path(name_or_path: str | os.PathLike) -> Path:
    p = Path(name_or_path)
    if p.is_file():
        return p
    for d in fixture_dirs():
        for cand in (d / p.name, d / f"{p.name}.json", d / f"{p.name}.toml"):
            if cand.is_file():
                return cand
    raise SchemaError(f"diagram file not found: {name_or_path}")


def load_diagram(name_or_path: str | os.PathLike) -> Diagram:
    path = resolve_path(name_or_path)
    return parse_diagram(path.read_text(), "toml" if path.suffix == ".toml" else "json")


# -- momentum expressions ---------------------------------------------------------

def _clean(d: Mapping) -> dict:
    return {k: v for k, v in d.items() if not v.is_zero()}


@dataclass(frozen=True)
class MomentumExpr:
    """sum_e c_e p_e + sum_a t_a q_{a,perp} + sum_a l_a q_a.

    ``loop_coeffs`` hold full (undecomposed) loop momenta; their dot products
    reduce to fresh symbols from :func:`loop_symbol`.
    """

    external_coeffs: tuple = ()
    transverse_coeffs: tuple = ()
    loop_coeffs: tuple = ()

    @classmethod
    def make(cls, external=None, transverse=None, loop=None) -> "MomentumExpr":
        def norm(d):
            d = {k: (v if hasattr(v, "is_zero") else RatFunc.lift(v)) for k, v in (d or {}).items()}
            return tuple(sorted(_clean(d).items()))

        return cls(norm(external), norm(transverse), norm(loop))

    @classmethod
    def transverse(cls, a: int, coeff=1) -> "MomentumExpr":
        return cls.make(transverse={a: coeff})

    @classmethod
    def loop(cls, a: int, coeff=1) -> "MomentumExpr":
        return cls.make(loop={a: coeff})

    def __add__(self, other: "MomentumExpr") -> "MomentumExpr":
        def merge(x, y):
            out = dict(x)
            for k, v in y:
                out[k] = out[k] + v if k in out else v
            return out

        return MomentumExpr.make(
            merge(self.external_coeffs, other.external_coeffs),
            merge(self.transverse_coeffs, other.transverse_coeffs),
            merge(self.loop_coeffs, other.loop_coeffs),
        )

    def scale(self, c) -> "MomentumExpr":
        c = c if hasattr(c, "is_zero") else RatFunc.lift(c)
        return MomentumExpr.make(
            {k: v * c for k, v in self.external_coeffs},
            {k: v * c for k, v in self.transverse_coeffs},
            {k: v * c for k, v in self.loop_coeffs},
        )

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def dot(self, other: "MomentumExpr", diagram: Diagram):
        total = ZERO_RF
        for e1, c1 in self.external_coeffs:
            for e2, c2 in other.external_coeffs:
                total = total + c1 * c2 * diagram.dot_ext(e1, e2)
        for a, c1 in self.transverse_coeffs:
            for b, c2 in other.transverse_coeffs:
                total = total + c1 * c2 * RatFunc.var(transverse_symbol(a, b))
        for a, c1 in self.loop_coeffs:
            for b, c2 in other.loop_coeffs:
                total = total + c1 * c2 * RatFunc.var(loop_symbol(a, b))
            for e, c2 in other.external_coeffs:
                total = total + c1 * c2 * RatFunc.var(loop_symbol(a, e))
        for e, c1 in self.external_coeffs:
            for b, c2 in other.loop_coeffs:
                total = total + c1 * c2 * RatFunc.var(loop_symbol(b, e))
        if (self.loop_coeffs and other.transverse_coeffs) or (self.transverse_coeffs and other.loop_coeffs):
            raise ReductionError("cannot reduce a full loop momentum against a transverse component")
        return total

    def sq(self, diagram: Diagram):
        return self.dot(self, diagram)


def shift_expr(prop: Propagator) -> MomentumExpr:
    return MomentumExpr.make(external={e: RatFunc.const(c) for e, c in prop.shift})


def propagator_momentum(diagram: Diagram, i: int, q: Sequence[MomentumExpr]) -> MomentumExpr:
    prop = diagram.propagators[i]
    k = shift_expr(prop)
    for a, l in enumerate(prop.routing):
        if l:
            k = k + q[a].scale(l)
    return k


def expand_propagator(diagram: Diagram, i: int, q: Sequence[MomentumExpr]):
    """D_i evaluated at per-loop momenta ``q``, with all dot products reduced."""
    if not 0 <= i < len(diagram.propagators):
        raise IndexError(f"propagator index {i} out of range")
    if len(q) != diagram.loops:
        raise ShapeError(f"need {diagram.loops} loop momenta, got {len(q)}")
    k = propagator_momentum(diagram, i, q)
    return k.sq(diagram) + diagram.propagators[i].mass_sq


def generic_loops(diagram: Diagram) -> list[MomentumExpr]:
    return [MomentumExpr.loop(a) for a in range(diagram.loops)]
