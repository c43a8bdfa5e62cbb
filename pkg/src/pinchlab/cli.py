"""Command-line front end.

JSON reports go to stdout and diagnostics to stderr.  Exit codes: 0 success,
2 input error, 3 symbolic-stage error, 4 numeric-stage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .asympt import exponent_for, leading_coefficient
from .diagram import Diagram, load_diagram
from .errors import (
    InconsistentSystem,
    InputError,
    NonConvergent,
    NotFinite,
    PinchlabError,
    ShapeMismatch,
    SymbolicError,
    UnsupportedPinch,
)
from .exactalg import format_value
from .landau import (
    bordered_gram_det,
    five_pinch_branches,
    five_pinch_det,
    five_pinch_shape,
    landau_from_pinch,
    theorem4_normalized,
)
from . import oracle
from .pinch import Classification, enumerate_subsets, solve_pinch

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

DEFAULTS = {
    "seed": 0,
    "samples": 1_000_000,
    "theta": math.pi / 2,
    "max_size": None,
    "dimension": None,
    "method": "pinch",
    "eps_min": 1e-4,
    "eps_max": 1e-1,
    "n_eps": 9,
}


# -- helpers -------------------------------------------------------------------

def parse_subset(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [x for x in str(text).replace(" ", "").split(",") if x]
    try:
        sub = tuple(sorted({int(x) for x in items}))
    except ValueError:
        raise InputError(f"subset must be a comma-separated list of integers, got {text!r}") from None
    if not sub:
        raise InputError("empty subset")
    return sub


def parse_dimension(text):
    if text is None or text == "d":
        return None
    try:
        return int(text)
    except (TypeError, ValueError):
        raise InputError(f"dimension must be an integer or 'd', got {text!r}") from None


def parse_kinematics(items) -> dict[str, Fraction]:
    if isinstance(items, dict):
        pairs = list(items.items())
    else:
        pairs = []
        for chunk in items or []:
            for part in str(chunk).split(","):
                if not part.strip():
                    continue
                if "=" not in part:
                    raise InputError(f"kinematics override {part!r} is not name=value")
                k, v = part.split("=", 1)
                pairs.append((k.strip(), v.strip()))
    out = {}
    for k, v in pairs:
        try:
            out[k] = Fraction(str(v))
        except (ValueError, ZeroDivisionError):
            raise InputError(f"kinematic value for {k!r} must be rational, got {v!r}") from None
    return out


def load_config(path) -> dict:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"bad TOML in {path}: {exc}") from None
    return {k.replace("-", "_"): v for k, v in doc.items()}


def _setting(args, cfg: dict, name: str):
    v = getattr(args, name, None)
    if v is not None:
        return v
    if name in cfg:
        return cfg[name]
    return DEFAULTS.get(name)


def _report(command: str, diagram: Diagram | None, config: dict, records) -> dict:
    return {
        "tool": "pinchlab",
        "version": __version__,
        "command": command,
        "diagram": diagram.name if diagram is not None else None,
        "config": config,
        "records": records,
    }


def _emit(report: dict) -> None:
    json.dump(report, sys.stdout, indent=2, sort_keys=False, default=_json_default)
    sys.stdout.write("\n")


def _json_default(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return format_value(x)


def write_csv(path, rows, header=("eps", "re", "im")) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for e, v in rows:
            v = complex(v)
            w.writerow([repr(float(e)), repr(v.real), repr(v.imag)])


# -- commands ------------------------------------------------------------------

def cmd_pinches(args, cfg) -> dict:
    diagram = load_diagram(args.diagram)
    max_size = _setting(args, cfg, "max_size")
    max_size = len(diagram.propagators) if max_size is None else int(max_size)
    try:
        subsets = enumerate_subsets(diagram, max_size)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    records = []
    for sub in subsets:
        try:
            records.append(solve_pinch(diagram, sub).to_dict())
        except (UnsupportedPinch, InconsistentSystem) as exc:
            # the subset is reported, not solved; other solver errors abort
            records.append({"subset": list(sub), "classification": "Unsupported",
                            "error": type(exc).__name__, "detail": str(exc)})
            print(f"note: subset {list(sub)}: {exc}", file=sys.stderr)
    return _report("pinches", diagram, {"max_size": max_size}, records)


def _solve(diagram: Diagram, subset):
    if any(not 0 <= i < len(diagram.propagators) for i in subset):
        raise InputError(f"subset {list(subset)} out of range for {len(diagram.propagators)} propagators")
    return solve_pinch(diagram, subset)


def cmd_landau(args, cfg) -> dict:
    diagram = load_diagram(args.diagram)
    subset = parse_subset(_setting(args, cfg, "subset"))
    method = _setting(args, cfg, "method")
    sol = _solve(diagram, subset)
    rec = {"pinch": sol.to_dict()}
    if method == "pinch":
        rec["landau"] = landau_from_pinch(sol).to_dict()
    elif method == "theorem4":
        rec["landau"] = theorem4_normalized(diagram, sol).to_dict()
    elif method == "bordered":
        rec["landau"] = {"subset": list(subset), "poly": format_value(bordered_gram_det(diagram, subset)),
                         "normalization": "unnormalized; corner entry -m0^2, equals -det(G) * D_0(Q)",
                         "branch": None, "method": "bordered Gram determinant"}
    elif method == "five-pinch":
        rec["landau"] = five_pinch_det(diagram, sol).to_dict()
        try:
            rec["branches"] = [b.to_dict() for b in five_pinch_branches(diagram, sol)]
        except (ShapeMismatch, SymbolicError) as exc:
            rec["branches_unavailable"] = str(exc)
    else:
        raise InputError(f"unknown method {method!r}")
    return _report("landau", diagram, {"subset": list(subset), "method": method}, [rec])


def cmd_asympt(args, cfg) -> dict:
    diagram = load_diagram(args.diagram)
    subset = parse_subset(_setting(args, cfg, "subset"))
    d = parse_dimension(_setting(args, cfg, "dimension"))
    sol = _solve(diagram, subset)
    exp = leading_coefficient(diagram, sol, d=d)
    rec = exp.to_dict()
    if d is not None:
        rec["exponent_value"] = str(exp.exponent.at(d))
    for w in exp.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return _report("asympt", diagram, {"subset": list(subset), "dimension": d if d is not None else "d"}, [rec])


def _numeric(diagram: Diagram, expr, kin) -> float:
    try:
        return float(expr.evaluate(kin))
    except KeyError as exc:
        raise InputError(f"no numeric value for {exc}; pass --kinematics") from None


def _is_qed_five(diagram: Diagram, subset, kin) -> bool:
    if len(subset) != 5:
        return False
    try:
        shape = five_pinch_shape(diagram, subset)
    except (ShapeMismatch, SymbolicError):
        return False
    onshell = (shape.q1[0], shape.q2[0])
    return all(_numeric(diagram, diagram.propagators[i].mass_sq, kin) == 0 for i in onshell)


def cmd_verify(args, cfg) -> tuple[dict, list]:
    diagram = load_diagram(args.diagram)
    subset = parse_subset(_setting(args, cfg, "subset"))
    d = parse_dimension(_setting(args, cfg, "d"))
    if d is None:
        raise InputError("verify needs a numeric dimension (--d)")
    seed = int(_setting(args, cfg, "seed"))
    samples = int(_setting(args, cfg, "samples"))
    theta = float(_setting(args, cfg, "theta"))
    kin = {k: v.const_value() for k, v in diagram.masses if v.is_const()}
    kin.update(parse_kinematics(cfg.get("kinematics", {})))
    kin.update(parse_kinematics(args.kinematics))
    grid = oracle.OracleConfig(eps_min=float(_setting(args, cfg, "eps_min")),
                               eps_max=float(_setting(args, cfg, "eps_max")),
                               n_eps=int(_setting(args, cfg, "n_eps"))).eps_grid()
    sol = _solve(diagram, subset)
    if sol.classification is not Classification.FINITE:
        raise NotFinite(f"subset {list(subset)} is classified {sol.classification.value}")
    exp = exponent_for(sol, d)
    config = {"subset": list(subset), "d": d, "seed": seed, "samples": samples, "theta": theta,
              "kinematics": {k: str(v) for k, v in kin.items()}}
    rec: dict = {"subset": list(subset), "predicted_exponent": str(exp.at(d)), "rule": str(exp)}

    if diagram.loops == 1 and len(subset) == 2:
        m0 = _numeric(diagram, diagram.propagators[subset[0]].mass_sq, kin)
        m1 = _numeric(diagram, diagram.propagators[subset[1]].mass_sq, kin)
        scan = oracle.bubble_scan(m0, m1, d, grid, theta)
        rows = scan.values
        rec.update({"oracle": "bubble", **scan.to_dict(), "passed": scan.passed()})
        if scan.logarithmic:
            rec["flags"] = ["LogarithmicCandidate"]
    elif _is_qed_five(diagram, subset, kin):
        if d != 3:
            raise InputError("the reduced QED oracle runs at d = 3 only")
        e_grid = [e for e in oracle.OracleConfig(eps_min=1e-3, eps_max=1e-1, n_eps=7).eps_grid()]
        scan = oracle.qed_scan(e_grid, samples=samples, seed=seed)
        rows = [(r.e_l, r.value) for r in scan.results]
        rec.update({"oracle": "qed_reduced", **scan.to_dict(),
                    "note": "coincident double pinch; exponent d-4 checked, not the generic rule",
                    "passed": abs(scan.fit.slope - scan.predicted) <= 0.1})
    else:
        from .asympt import theorem3_dets
        import numpy as np

        t3 = theorem3_dets(diagram, sol)
        try:
            Q = np.array([[float(x.evaluate(kin).real) if hasattr(x, "radicand") else float(x.evaluate(kin))
                           for x in row] for row in t3["quad_form"]])
        except (KeyError, ZeroDivisionError) as exc:
            raise InputError(f"cannot evaluate the transverse form numerically: {exc}") from None
        block = Q.shape[0]
        n = d * len(sol.involved_loops) - sol.parallel_rank
        if block == 0 or n > 5:
            raise InputError(f"transverse dimension {n} outside the Morse oracle range 1..5")
        full = np.kron(Q, np.eye(n // block)) if n % block == 0 else None
        if full is None:
            raise InputError("transverse dimension is not a multiple of the loop count")
        sc = oracle.morse_scan(full, grid)
        rows = sc.fit.samples
        rec.update({"oracle": "morse", **sc.to_dict(),
                    "passed": sc.slope_error is not None and sc.slope_error <= 0.02
                    if n != 2 else sc.fit.accepted()})
    rec["predicted_exponent"] = str(exp.at(d))
    if args.out:
        write_csv(args.out, rows)
        rec["csv"] = str(args.out)
    return _report("verify", diagram, config, [rec]), rows


def cmd_oracle(args, cfg) -> dict:
    seed = int(_setting(args, cfg, "seed"))
    tests = [oracle.residue_selftest(seed=seed)] + oracle.morse_selftest(seed=seed)
    failed = [t.name for t in tests if not t.passed]
    rep = _report("oracle", None, {"seed": seed}, [t.to_dict() for t in tests])
    if failed:
        raise NonConvergent(f"self-tests failed: {', '.join(failed)}")
    return rep


# -- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pinchlab", description="Pinch points, Landau polynomials and asymptotics.")
    ap.add_argument("--version", action="version", version=f"pinchlab {__version__}")
    ap.add_argument("--config", help="TOML file whose keys mirror the flags")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pinches", help="classify every candidate subset")
    p.add_argument("diagram", help="fixture name or path to a JSON/TOML diagram")
    p.add_argument("--max-size", dest="max_size", type=int)

    p = sub.add_parser("landau", help="Landau polynomial for one subset")
    p.add_argument("diagram", help="fixture name or path to a JSON/TOML diagram")
    p.add_argument("--subset")
    p.add_argument("--method", choices=["pinch", "theorem4", "bordered", "five-pinch"])

    p = sub.add_parser("asympt", help="exponent and leading coefficient for one subset")
    p.add_argument("diagram", help="fixture name or path to a JSON/TOML diagram")
    p.add_argument("--subset")
    p.add_argument("--dimension")

    p = sub.add_parser("verify", help="numeric slope check against the predicted exponent")
    p.add_argument("diagram", help="fixture name or path to a JSON/TOML diagram")
    p.add_argument("--subset")
    p.add_argument("--d", dest="d")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--kinematics", action="append", help="name=value overrides, comma separated")
    p.add_argument("--out", type=Path, help="CSV of (eps, value) pairs")

    p = sub.add_parser("oracle", help="residue-kernel and Morse-integral self-tests")
    p.add_argument("--seed", type=int)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        cfg = load_config(args.config)
        if args.command in ("landau", "asympt", "verify") and _setting(args, cfg, "subset") is None:
            raise InputError("--subset is required")
        if args.command == "pinches":
            rep = cmd_pinches(args, cfg)
        elif args.command == "landau":
            rep = cmd_landau(args, cfg)
        elif args.command == "asympt":
            rep = cmd_asympt(args, cfg)
        elif args.command == "verify":
            rep, _ = cmd_verify(args, cfg)
        else:
            rep = cmd_oracle(args, cfg)
    except PinchlabError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, KeyError) as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2
    _emit(rep)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
