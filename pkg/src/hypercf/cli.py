"""Command-line front end: system documents, the reduction pipeline and reports.

Exit codes: 0 success, 1 invalid input, 2 reduction failed, 3 oracle check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import mpmath

from .errors import (
    DomainError,
    HcfError,
    NotControllable,
    NotReducible,
    ReductionDiverged,
    SchemaError,
    StructureViolation,
)
from .gpmatrix import GPolyMatrix
from .gpoly import GPoly, PolyD, RatD
from .hcf import emit_report
from .pipeline import FAULT_TARGETS, inject_fault, run_checks, run_pipeline
from .scalars import DelayBasis, parse_const, parse_exponent, set_precision, settings
from .system import HyperbolicSystem, build_H, random_system, strings_demo_matrix

EXIT_OK, EXIT_INPUT, EXIT_REDUCE, EXIT_ORACLE = 0, 1, 2, 3
INPUT_ERRORS = (SchemaError, DomainError, NotControllable, StructureViolation)
OPTION_KEYS = ("precision", "tol_entire", "tol_oracle", "passes", "seed", "max_den_degree")
SYSTEM_KEYS = ("F", "B", "Q0", "Q1", "C", "tau_minus", "tau_plus")


# --- system documents --------------------------------------------------------------


def _field(doc, key, path):
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected an object")
    if key not in doc:
        raise SchemaError(f"{path}: missing field {key!r}")
    return doc[key]


def _rational(x, path) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise SchemaError(f"{path}: expected an integer or a rational string, got {x!r}")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError):
        raise SchemaError(f"{path}: cannot read {x!r} as a rational") from None


def _rational_matrix(x, path):
    if not isinstance(x, list) or not all(isinstance(r, list) for r in x):
        raise SchemaError(f"{path}: expected a list of rows")
    return [[_rational(v, f"{path}[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(x)]


def _coeff(x, basis, path):
    """A dt-coefficient: ascending array, or ``{"num": [...], "den": [...]}``."""
    try:
        if isinstance(x, list):
            return RatD(PolyD([parse_const(str(c), basis) for c in x]))
        if isinstance(x, dict):
            num = [parse_const(str(c), basis) for c in _field(x, "num", path)]
            den = [parse_const(str(c), basis) for c in _field(x, "den", path)]
            return RatD(PolyD(num), PolyD(den))
    except (DomainError, ValueError, SyntaxError) as exc:
        raise SchemaError(f"{path}: {exc}") from None
    raise SchemaError(f"{path}: expected a coefficient array")


def _coeff_doc(c: RatD):
    if c.den.deg == 0:
        return [str(a) for a in c.num.c]
    return {"num": [str(a) for a in c.num.c], "den": [str(a) for a in c.den.c]}


def parse_system_document(text: str):
    """Returns ``(kind, payload, options)`` with kind "system" (mode a) or "H" (mode b)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise SchemaError("document: expected an object")
    unknown = set(doc) - {"basis", "system", "H", "options"}
    if unknown:
        raise SchemaError(f"document: unknown fields {sorted(unknown)}")
    raw_basis = doc.get("basis", {})
    if not isinstance(raw_basis, dict) or not all(isinstance(v, (str, int)) for v in raw_basis.values()):
        raise SchemaError("basis: expected a mapping of names to value strings")
    basis = DelayBasis({k: str(v) for k, v in raw_basis.items()})
    options = doc.get("options", {})
    if not isinstance(options, dict) or set(options) - set(OPTION_KEYS):
        raise SchemaError(f"options: expected an object with fields among {list(OPTION_KEYS)}")
    if ("system" in doc) == ("H" in doc):
        raise SchemaError("document: exactly one of 'system' and 'H' is required")
    if "system" in doc:
        return "system", _parse_system(doc["system"], basis), options
    return "H", _parse_H(doc["H"], basis), options


def _parse_system(s, basis) -> HyperbolicSystem:
    mats = {k: _rational_matrix(_field(s, k, "system"), f"system.{k}") for k in ("F", "B", "Q0", "Q1", "C")}
    taus = {}
    for k in ("tau_minus", "tau_plus"):
        vals = _field(s, k, "system")
        if not isinstance(vals, list):
            raise SchemaError(f"system.{k}: expected a list of exponent expressions")
        try:
            taus[k] = [parse_exponent(str(v), basis) for v in vals]
        except (DomainError, ValueError, SyntaxError) as exc:
            raise SchemaError(f"system.{k}: {exc}") from None
    return HyperbolicSystem(mats["F"], mats["B"], taus["tau_minus"], taus["tau_plus"],
                            mats["Q0"], mats["Q1"], mats["C"], basis)


def _parse_H(h, basis) -> GPolyMatrix:
    shape = _field(h, "shape", "H")
    if not (isinstance(shape, list) and len(shape) == 2 and all(isinstance(v, int) and v > 0 for v in shape)):
        raise SchemaError("H.shape: expected [rows, cols] with positive integers")
    n, m = shape
    rows = [[GPoly.zero(basis) for _ in range(m)] for _ in range(n)]
    for k, e in enumerate(_field(h, "entries", "H")):
        path = f"H.entries[{k}]"
        if not (isinstance(e, list) and len(e) == 4):
            raise SchemaError(f"{path}: expected [row, col, exponent, coefficients]")
        i, j, ex, c = e
        if not (isinstance(i, int) and isinstance(j, int) and 0 <= i < n and 0 <= j < m):
            raise SchemaError(f"{path}: index ({i}, {j}) outside shape {shape}")
        try:
            ell = parse_exponent(str(ex), basis)
        except (DomainError, ValueError, SyntaxError) as exc:
            raise SchemaError(f"{path}: {exc}") from None
        rows[i][j] = rows[i][j] + GPoly.monomial(ell, _coeff(c, basis, path), basis)
    return GPolyMatrix(rows, basis)


def _basis_doc(basis):
    return basis.to_dict() if basis is not None else {}


def system_document(sys_: HyperbolicSystem, options: dict | None = None) -> dict:
    """Mode-a document for ``sys_``."""
    grid = lambda M: [[str(x) for x in r] for r in M]  # noqa: E731
    doc = {
        "basis": _basis_doc(sys_.basis),
        "system": {
            "F": grid(sys_.F),
            "B": grid(sys_.B),
            "Q0": grid(sys_.Q0),
            "Q1": grid(sys_.Q1),
            "C": grid(sys_.C),
            "tau_minus": [str(t) for t in sys_.tau_minus],
            "tau_plus": [str(t) for t in sys_.tau_plus],
        },
    }
    if options:
        doc["options"] = options
    return doc


def matrix_document(H: GPolyMatrix, options: dict | None = None) -> dict:
    """Mode-b document for ``H`` (one entry per shift term)."""
    n, m = H.shape
    entries = [[i, j, str(e), _coeff_doc(c)] for i in range(n) for j in range(m) if H[i, j] for e, c in H[i, j].terms]
    doc = {"basis": _basis_doc(H.basis), "H": {"shape": [n, m], "entries": entries}}
    if options:
        doc["options"] = options
    return doc


def dump(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def cmd_gen(seed: int, n: int | None = None, n_minus: int | None = None, mode: str = "a") -> str:
    """Deterministic random system document."""
    sys_ = random_system(seed, n, n_minus)
    if mode == "b":
        return dump(matrix_document(build_H(sys_)))
    return dump(system_document(sys_))


def demo_document() -> str:
    return dump(matrix_document(strings_demo_matrix()))


# --- commands ---------------------------------------------------------------------


def _apply_options(opts: dict, args) -> dict:
    """Merge document options with command-line flags (flags win)."""
    merged = dict(opts)
    for key in OPTION_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    set_precision(int(merged.get("precision", 50)))
    if "tol_entire" in merged:
        settings.eps_entire = str(merged["tol_entire"])
    if "tol_oracle" in merged:
        settings.eps_oracle = str(merged["tol_oracle"])
    if "max_den_degree" in merged:
        settings.max_den_degree = int(merged["max_den_degree"])
    return merged


def _load(args):
    if getattr(args, "demo", None) == "strings":
        text = demo_document()
    elif args.input in (None, "-"):
        text = sys.stdin.read()
    else:
        with open(args.input) as fh:
            text = fh.read()
    kind, payload, opts = parse_system_document(text)
    opts = _apply_options(opts, args)
    if kind == "system":
        payload.check_class()
        H = build_H(payload)
    else:
        H = payload
    return H, opts


def _report_dict(r) -> dict:
    return {
        "name": r.name,
        "passed": bool(r.passed),
        "max_residual": mpmath.nstr(r.max_residual, 5),
        "tol": mpmath.nstr(r.tol, 5),
        "points": getattr(r, "points", len(getattr(r, "residuals", []))),
        "seed": getattr(r, "seed", None),
    }


def _write(text: str, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_reduce(args) -> int:
    H, opts = _load(args)
    res = run_pipeline(H, passes=opts.get("passes"), reduce=not args.no_reduce)
    _write(emit_report(res.description, args.format), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    H, opts = _load(args)
    res = run_pipeline(H, passes=opts.get("passes"), reduce=not args.no_reduce)
    seed = int(opts.get("seed", 0))
    if args.inject_fault:
        print("fault injected: " + inject_fault(res, args.inject_fault, seed=seed), file=sys.stderr)
    reports = run_checks(res, seed=seed)
    res.description.oracle = [_report_dict(r) for r in reports]
    if args.format == "text":
        text = "".join(r.line() + "\n" for r in reports)
    else:
        text = emit_report(res.description, args.format)
    _write(text, args.out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_ORACLE


def _cmd_gen(args) -> int:
    seed = 0 if args.seed is None else args.seed
    _write(cmd_gen(seed, args.n, args.n_minus, args.mode), args.out)
    return EXIT_OK


def _cmd_demo(args) -> int:
    args.demo = args.name
    args.input = None
    return cmd_check(args) if args.check else cmd_reduce(args)


def _common(p):
    p.add_argument("--precision", type=int, help="working precision in digits (default 50)")
    p.add_argument("--tol-entire", dest="tol_entire", help="entirety residual tolerance")
    p.add_argument("--tol-oracle", dest="tol_oracle", help="identity residual tolerance")
    p.add_argument("--passes", type=int, help="pass budget of the shift reduction")
    p.add_argument("--seed", type=int, help="seed for oracle points and generators")
    p.add_argument("--max-den-degree", dest="max_den_degree", type=int,
                   help="abort the reduction when a denominator exceeds this degree")
    p.add_argument("--format", choices=("text", "json", "json-like", "latex"), default="text")
    p.add_argument("--out", help="write output to this path instead of stdout")
    p.add_argument("--no-reduce", dest="no_reduce", action="store_true",
                   help="skip the shift reduction (sorting only)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypercf", description="Hyperbolic controller forms.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("reduce", "compute the controller form"), ("check", "compute and verify")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("input", nargs="?", help="system document (JSON); '-' for stdin")
        p.add_argument("--demo", choices=("strings",), help="use a built-in fixture")
        _common(p)
        if name == "check":
            p.add_argument("--inject-fault", dest="inject_fault", choices=FAULT_TARGETS,
                           help="perturb one coefficient before checking")
        p.set_defaults(func=cmd_reduce if name == "reduce" else cmd_check)
    p = sub.add_parser("gen", help="random system document")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int, help="ODE order (<= 6)")
    p.add_argument("--n-minus", dest="n_minus", type=int, help="number of inputs (<= 4)")
    p.add_argument("--mode", choices=("a", "b"), default="a", help="a: system matrices, b: H terms")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen)
    p = sub.add_parser("demo", help="built-in fixtures")
    p.add_argument("name", choices=("strings",))
    p.add_argument("--check", action="store_true", help="also run the oracle suite")
    p.add_argument("--inject-fault", dest="inject_fault", choices=FAULT_TARGETS)
    _common(p)
    p.set_defaults(func=_cmd_demo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NotReducible, ReductionDiverged) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REDUCE
    except HcfError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REDUCE


if __name__ == "__main__":
    sys.exit(main())
