"""Command-line front end.

Exit codes: 0 when the check succeeds (zero residual, full positive system),
1 when it fails (nonzero residual, contradiction), 2 on invalid input.
"""

from __future__ import annotations

import argparse
import ast
import json
import os
import sys
import warnings
from typing import Sequence

from ._backend import BACKEND, qq, to_str
from .constraints import ConstraintError, classify_arrangement, residue_constraints
from .diffop import DiffOp, constant_principal_symbol
from .laurent import LaurentError
from .models import (
    PotentialSpec,
    UnsupportedPotential,
    build_L,
    build_pair,
    functional_equation_check,
    verify_commutant,
    wp_series,
)
from .rankone import PoleOrderError, is_generic, obstruction, rank_one_reduce
from .reflection import (
    DEFAULT_CAP,
    _connected,
    generate_group,
    is_invariant,
    positive_system,
)
from .serialize import (
    SchemaError,
    arrangement_from_json,
    diffop_from_json,
    dumps,
    parse_ratfunc,
    ratfunc_to_json,
    report_to_json,
    spec_from_json,
    spec_to_json,
)

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


class InputError(ValueError):
    pass


def _load_input(arg: str | None):
    """Inline JSON (starting with ``{``) or a path to a JSON file."""
    if arg is None:
        return None
    text = arg
    if not arg.lstrip().startswith("{"):
        if not os.path.exists(arg):
            raise InputError(f"input file {arg!r} not found")
        with open(arg, encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON input: {exc}") from exc


def _emit(args, payload: dict, human: Sequence[str]):
    if args.format == "json":
        print(dumps(payload))
    else:
        for line in human:
            print(line)


def _spec_from_args(args) -> PotentialSpec:
    data = _load_input(getattr(args, "in_", None)) or {}
    if "spec" in data:
        data = data["spec"]
    if args.C is not None:
        data["C"] = args.C
    if getattr(args, "C0", None) is not None:
        data["C0"] = args.C0
    return spec_from_json(data)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    kind, n = args.type, args.n
    if kind == "A" and n < 3:
        raise InputError("type A verification needs n >= 3")
    if kind == "B" and n < 2:
        raise InputError("type B verification needs n >= 2")
    if kind == "D" and n < 3:
        raise InputError("type D verification needs n >= 3")
    spec = _spec_from_args(args)
    if kind in {"A", "D"} and spec.C0 != 0:
        raise InputError(f"type {kind} has no coordinate roots; omit --C0")
    L, P = build_pair(kind, n, spec)
    rep = verify_commutant(L, P)

    arr = positive_system(kind, n) if not (kind == "D" and n == 3) else None
    invariant = None
    if arr is not None:
        group = generate_group(arr, cap=args.cap)
        if not group.capped:
            invariant = is_invariant(constant_principal_symbol(P), group)

    payload = {
        "command": "verify",
        "type": kind,
        "n": n,
        "spec": spec_to_json(spec),
        "order": P.order(),
        "symbol_invariant": invariant,
        **report_to_json(rep),
    }
    human = [
        f"type {kind}, n = {n}, order of P = {P.order()}",
        "commutator [L, P] = 0" if rep.zero else f"commutator nonzero; first grade {rep.first_grade()}",
    ]
    if invariant is not None:
        human.append(f"principal symbol invariant under the reflection group: {invariant}")
    _emit(args, payload, human)
    return EXIT_OK if rep.zero else EXIT_FAIL


# ---------------------------------------------------------------------------
# obstruct
# ---------------------------------------------------------------------------

def cmd_obstruct(args) -> int:
    C, normsq = qq(args.C), qq(args.normsq)
    if normsq <= 0:
        raise InputError("--normsq must be positive")
    if args.m < 0:
        raise InputError("--m must be non-negative")
    cbar = C / normsq
    verdict = is_generic(C, normsq)
    rows = [{"m": m, "obstruction": to_str(obstruction(cbar, m))} for m in range(args.m + 1)]
    last = obstruction(cbar, args.m)
    payload = {
        "command": "obstruct",
        "C": to_str(C),
        "normsq": to_str(normsq),
        "cbar": to_str(cbar),
        "genericity": str(verdict),
        "table": rows,
    }
    human = [f"cbar = {to_str(cbar)}: {verdict}"] + [f"  m = {r['m']}: {r['obstruction']}" for r in rows]
    _emit(args, payload, human)
    return EXIT_OK if last == 0 else EXIT_FAIL


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------

def cmd_classify(args) -> int:
    data = _load_input(args.in_)
    if data is None:
        if args.type is None or args.n is None:
            raise InputError("classify needs --in or both --type and --n")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            arr = positive_system(args.type, args.n)
        arr = arr.with_couplings([None] * len(arr.roots))
        data, kind = {}, args.type
    else:
        arr = arrangement_from_json(data)
        kind = data.get("type") or args.type
    seed = data.get("seed")
    if args.seed is not None:
        seed = _load_input(args.seed) if args.seed.lstrip().startswith("{") else args.seed
    closed = bool(data.get("closed", False))

    payload = {"command": "classify"}
    if arr.roots and not _connected(arr.roots):
        payload.update({"status": "contradiction", "reason": "fails_I2", "root_type": None})
        _emit(args, payload, ["contradiction: the listed roots split into orthogonal subsets (fails_I2)"])
        return EXIT_FAIL
    cs = residue_constraints(arr, kind=kind, closed=closed)
    verdict = classify_arrangement(cs, seed)
    payload.update(verdict.to_dict())
    payload["type"] = cs.kind
    payload["n"] = cs.n
    payload["equations"] = len(cs.equations)
    if verdict.status == "full_positive_system":
        rank = cs.n - 1 if cs.kind == "A" else cs.n
        label = verdict.root_type if verdict.root_type == "B|D" else f"{verdict.root_type}{rank}"
        human = [f"full positive system of type {label}"]
        groups: dict = {}
        for u, lab in sorted(verdict.couplings.items()):
            groups.setdefault(lab, []).append(u)
        for lab, members in sorted(groups.items()):
            val = verdict.values.get(lab)
            human.append(f"  {lab}{' = ' + val if val else ''}: {', '.join(members)}")
    else:
        human = [f"{verdict.status}: {verdict.reason}"]
    _emit(args, payload, human)
    return EXIT_OK if verdict.status == "full_positive_system" else EXIT_FAIL


# ---------------------------------------------------------------------------
# reduce
# ---------------------------------------------------------------------------

def _operator_from(obj) -> tuple[DiffOp, list[str]]:
    if "builder" in obj:
        b = obj["builder"]
        spec = spec_from_json(b.get("spec", {}))
        L, P = build_pair(b["type"].upper(), int(b["n"]), spec)
        which = b.get("operator", "P")
        if which not in {"L", "P"}:
            raise InputError("builder operator must be 'L' or 'P'")
        return (L if which == "L" else P), spec.param_names()
    return diffop_from_json(obj), list(obj.get("params", []))


def _align_params(L: DiffOp, lp: list, P: DiffOp, pp: list) -> tuple[DiffOp, DiffOp, list]:
    if lp == pp:
        return L, P, lp
    if not pp:
        return L, P.with_params(L.nparams), lp
    if not lp:
        return L.with_params(P.nparams), P, pp
    raise InputError("L and P must use the same parameter names")


def cmd_reduce(args) -> int:
    data = _load_input(args.in_)
    if data is None:
        if args.type is None or args.n is None:
            raise InputError("reduce needs --in or both --type and --n")
        spec = _spec_from_args(args)
        L, P = build_pair(args.type, args.n, spec)
        params = spec.param_names()
        alpha_src = args.alpha
    else:
        if "P" not in data:
            raise InputError("reduce input needs an operator under 'P'")
        P, pp = _operator_from(data["P"])
        if "L" in data:
            L, lp = _operator_from(data["L"])
        elif "arrangement" in data:
            arr = arrangement_from_json(data["arrangement"])
            L = build_L(arr)
            lp = [c for c in arr.couplings if isinstance(c, str)]
        else:
            raise InputError("reduce input needs 'L' or 'arrangement'")
        L, P, params = _align_params(L, lp, P, pp)
        alpha_src = data.get("alpha", args.alpha)
    if alpha_src is None:
        raise InputError("reduce needs --alpha")
    alpha = [qq(a) for a in (alpha_src.split(",") if isinstance(alpha_src, str) else alpha_src)]
    if len(alpha) != P.nvars:
        raise InputError("alpha has the wrong length")

    payload = {"command": "reduce", "alpha": [to_str(a) for a in alpha]}
    try:
        res = rank_one_reduce(P, L, alpha)
    except PoleOrderError as exc:
        payload.update({"holds": False, "pole_order_violation": {"grade": exc.k, "order": exc.order}})
        _emit(args, payload, [str(exc)])
        return EXIT_FAIL
    payload.update(
        {
            "cbar": ratfunc_to_json(res.cbar),
            "pole_orders": res.pole_orders,
            "holds": res.holds,
            "one_variable_zero": res.one_variable_zero,
            "frame": [[to_str(c) for c in f] for f in res.frame],
            "failure": None
            if res.failure is None
            else {"order": res.failure[0], "eta": list(res.failure[1]), "value": ratfunc_to_json(res.failure[2])},
        }
    )
    human = [f"pole orders by grade: {res.pole_orders}"]
    if res.holds:
        human.append("rank-one equation holds")
    else:
        human.append(f"rank-one equation fails at order {res.failure[0]}, eta = {res.failure[1]}")
    human.append(f"one-variable commutator zero: {res.one_variable_zero}")
    _emit(args, payload, human)
    return EXIT_OK if res.holds and res.one_variable_zero else EXIT_FAIL


# ---------------------------------------------------------------------------
# series-check
# ---------------------------------------------------------------------------

def _identifiers(expr: str) -> list[str]:
    try:
        tree = ast.parse(expr.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise SchemaError(f"cannot parse expression {expr!r}") from exc
    found = []
    for node in ast.walk(tree):
        if isinstance(node, ast.Name) and node.id != "t" and node.id not in found:
            found.append(node.id)
    return sorted(found)


def cmd_series_check(args) -> int:
    if args.n < 3:
        raise InputError("the functional equation needs n >= 3")
    if args.u is not None:
        params = _identifiers(args.u)
        u = parse_ratfunc(args.u, ["t"] + params)
        res = functional_equation_check(args.n, u)
        source = {"u": args.u, "params": params}
    else:
        if args.N < 2:
            raise InputError("--N must be at least 2")
        g2 = None if args.g2 in (None, "g2") else qq(args.g2)
        g3 = None if args.g3 in (None, "g3") else qq(args.g3)
        res = functional_equation_check(args.n, wp_series(g2, g3, args.N))
        source = {"g2": "g2" if g2 is None else to_str(g2), "g3": "g3" if g3 is None else to_str(g3), "N": args.N}
    payload = {
        "command": "series-check",
        "n": args.n,
        **source,
        "holds": res.holds,
        "first_failing_order": res.first_failing_order,
        "checked_through": res.checked_through,
    }
    if res.holds:
        human = ["functional equation holds" + (f" through order {res.checked_through}" if res.checked_through is not None else " identically")]
    else:
        human = [f"functional equation fails; first failing order {res.first_failing_order}"]
    _emit(args, payload, human)
    return EXIT_OK if res.holds else EXIT_FAIL


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _type_arg(s: str) -> str:
    s = s.upper()
    if s not in {"A", "B", "D"}:
        raise argparse.ArgumentTypeError("type must be A, B or D")
    return s


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["human", "json"], default="human")
    common.add_argument("--in", dest="in_", metavar="PATH_OR_JSON", help="JSON file or inline JSON")

    parser = argparse.ArgumentParser(prog="commutant", description="Exact commutants of inverse-square Schroedinger operators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s 0.1.0 ({BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="build L and P and check [L, P] = 0")
    v.add_argument("--type", type=_type_arg, required=True)
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--C", default=None, help="pair coupling: p/q or a parameter name")
    v.add_argument("--C0", default=None, help="coordinate-root coupling (type B)")
    v.add_argument("--cap", type=int, default=DEFAULT_CAP, help="group closure cap")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("obstruct", parents=[common], help="one-variable obstruction table")
    o.add_argument("--C", required=True)
    o.add_argument("--normsq", default="1")
    o.add_argument("--m", type=int, default=3)
    o.set_defaults(func=cmd_obstruct)

    c = sub.add_parser("classify", parents=[common], help="classify couplings from residue relations")
    c.add_argument("--type", type=_type_arg, default=None)
    c.add_argument("--n", type=int, default=None)
    c.add_argument("--seed", default=None, help="unknown name assumed nonzero, or seed JSON")
    c.set_defaults(func=cmd_classify)

    r = sub.add_parser("reduce", parents=[common], help="rank-one reduction along a root")
    r.add_argument("--type", type=_type_arg, default=None)
    r.add_argument("--n", type=int, default=None)
    r.add_argument("--C", default=None)
    r.add_argument("--C0", default=None)
    r.add_argument("--alpha", default=None, help="comma-separated root, e.g. 1,-1,0")
    r.set_defaults(func=cmd_reduce)

    s = sub.add_parser("series-check", parents=[common], help="type A functional equation check")
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--g2", default=None, help="p/q, or omit for symbolic")
    s.add_argument("--g3", default=None)
    s.add_argument("--N", type=int, default=12)
    s.add_argument("--u", default=None, help="rational u(t), e.g. 'C/t^2'")
    s.set_defaults(func=cmd_series_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        InputError,
        SchemaError,
        ConstraintError,
        UnsupportedPotential,
        LaurentError,
        ValueError,
        ZeroDivisionError,
        KeyError,
        TypeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
