"""JSON forms of the exact objects.

All numbers are written as ``"p/q"`` strings.  Rational functions are
stored as numerator and denominator term lists ``[{"c": "p/q", "e": [...]}]``
in canonical form.  On input, coefficients may also be arithmetic
expressions over ``x1 .. xn`` and parameter names, read exactly by
:func:`parse_ratfunc`.  :func:`dumps` sorts keys so identical inputs give identical
bytes.
"""

from __future__ import annotations

import ast
import json
from typing import Sequence

from ._backend import qq, to_str
from .diffop import DiffOp
from .models import CommutantReport, PotentialSpec
from .poly import Poly, grlex_key
from .ratfunc import RatFunc
from .reflection import Arrangement


class SchemaError(ValueError):
    """Input JSON does not match the expected layout."""


def coord_names(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)]


# ---------------------------------------------------------------------------
# expressions
# ---------------------------------------------------------------------------

def parse_ratfunc(text: str, names: Sequence[str]) -> RatFunc:
    """Exact rational function from an arithmetic expression.

    Accepts integers, ``p/q`` literals, the given variable names, ``+ - * /``,
    and ``^`` or ``**`` with integer exponents.  Floats are rejected.
    """
    names = list(names)
    n = len(names)
    try:
        tree = ast.parse(str(text).replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise SchemaError(f"cannot parse expression {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, int):
                raise SchemaError(f"only integer literals are allowed, got {node.value!r}")
            return RatFunc.const(n, node.value)
        if isinstance(node, ast.Name):
            if node.id not in names:
                raise SchemaError(f"unknown variable {node.id!r}")
            return RatFunc.var(n, names.index(node.id))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                e = node.right
                sign = 1
                if isinstance(e, ast.UnaryOp) and isinstance(e.op, ast.USub):
                    sign, e = -1, e.operand
                if not (isinstance(e, ast.Constant) and isinstance(e.value, int)):
                    raise SchemaError("exponents must be integer literals")
                return ev(node.left) ** (sign * e.value)
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                if b.is_zero():
                    raise SchemaError("division by zero in expression")
                return a / b
        raise SchemaError(f"unsupported syntax in {text!r}")

    return ev(tree)


def _terms_json(p: Poly) -> list:
    order = sorted(p.terms, key=grlex_key, reverse=True)
    return [{"c": to_str(p.terms[e]), "e": list(e)} for e in order]


def _terms_from_json(nvars: int, items) -> Poly:
    if isinstance(items, str):
        raise SchemaError("term lists must be arrays of {c, e}")
    terms = {}
    for t in items:
        e = tuple(int(k) for k in t["e"])
        if len(e) != nvars or any(k < 0 for k in e):
            raise SchemaError(f"exponent vector {list(e)} does not fit {nvars} variables")
        c = qq(t["c"])
        terms[e] = terms.get(e, 0) + c
    return Poly(nvars, terms)


def poly_to_json(p: Poly) -> dict:
    return {"nvars": p.nvars, "num": _terms_json(p), "den": [{"c": "1/1", "e": [0] * p.nvars}]}


def ratfunc_to_json(f: RatFunc) -> dict:
    """``{"nvars", "num": [{"c", "e"}], "den": [...]}`` in canonical form."""
    return {"nvars": f.nvars, "num": _terms_json(f.num), "den": _terms_json(f.den)}


def ratfunc_from_json(obj, names: Sequence[str] | None = None, nvars: int | None = None) -> RatFunc:
    """Read the term-list form, or an expression string over ``names``."""
    if isinstance(obj, (str, int)):
        if names is None:
            raise SchemaError("expression input needs variable names")
        return parse_ratfunc(str(obj), names)
    if not isinstance(obj, dict) or "num" not in obj:
        raise SchemaError("a rational function is {nvars, num, den} or an expression string")
    try:
        n = int(obj.get("nvars", nvars if nvars is not None else -1))
        if n < 0:
            raise SchemaError("missing nvars")
        if nvars is not None and n != nvars:
            raise SchemaError(f"coefficient has {n} variables, expected {nvars}")
        num = _terms_from_json(n, obj["num"])
        den = _terms_from_json(n, obj["den"]) if "den" in obj else Poly.one(n)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad rational function: {exc}") from exc
    if den.is_zero():
        raise SchemaError("zero denominator")
    return RatFunc(num, den)


def ratfunc_to_str(f: RatFunc, names: Sequence[str]) -> str:
    return f.to_str(list(names))


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def diffop_to_json(d: DiffOp, params: Sequence[str] = ()) -> dict:
    """``{"nvars", "terms": [{"dx", "coeff"}]}``; ``params`` names extra ring variables."""
    params = list(params) or [f"c{i + 1}" for i in range(d.nparams)]
    if len(params) != d.nparams:
        raise SchemaError("one name per parameter is required")
    terms = [
        {"dx": list(p), "coeff": ratfunc_to_json(d.terms[p])}
        for p in sorted(d.terms, key=lambda q: (-sum(q), tuple(-k for k in q)))
    ]
    out = {"nvars": d.nvars, "terms": terms}
    if params:
        out["params"] = params
    return out


def diffop_from_json(obj) -> DiffOp:
    """Operator from ``{"nvars", "params"?, "terms": [{"dx", "coeff"}]}``.

    Coefficients live in ``nvars + len(params)`` variables and may also be
    given as expression strings over ``x1 .. xn`` and the parameter names.
    """
    try:
        n = int(obj["nvars"])
        params = list(obj.get("params", []))
        names = coord_names(n) + params
        acc: dict = {}
        for t in obj["terms"]:
            p = tuple(int(k) for k in t["dx"])
            if len(p) != n or any(k < 0 for k in p):
                raise SchemaError(f"multi-index {list(p)} does not fit {n} variables")
            c = ratfunc_from_json(t["coeff"], names, len(names))
            acc[p] = acc[p] + c if p in acc else c
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad operator: {exc}") from exc
    return DiffOp(n, acc, len(params))


# ---------------------------------------------------------------------------
# arrangements and potentials
# ---------------------------------------------------------------------------

def _num_or_name(v):
    if v is None:
        return None
    if isinstance(v, str):
        try:
            return to_str(qq(v))
        except (ValueError, ZeroDivisionError):
            return v
    return to_str(qq(v))


def arrangement_to_json(arr: Arrangement) -> dict:
    """``{"nvars", "roots": [{"v", "C"}]}``; ``C`` is ``null`` when unknown."""
    return {
        "nvars": arr.nvars,
        "roots": [{"v": [to_str(c) for c in r.coords], "C": _num_or_name(c)} for r, c in zip(arr.roots, arr.couplings)],
    }


def arrangement_from_json(obj) -> Arrangement:
    try:
        n = int(obj["nvars"])
        roots, couplings = [], []
        for r in obj["roots"]:
            roots.append([qq(c) for c in r["v"]])
            c = r.get("C", 1)
            couplings.append(c if c is None or isinstance(c, str) else qq(c))
        return Arrangement(n, roots, couplings)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad arrangement: {exc}") from exc
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def spec_to_json(spec: PotentialSpec) -> dict:
    out = {"kind": spec.kind, "C": _num_or_name(spec.C), "C0": _num_or_name(spec.C0)}
    if spec.kind == "wp_series":
        out.update({"g2": _num_or_name(spec.g2), "g3": _num_or_name(spec.g3), "N": spec.N})
    if spec.m_param:
        out["m_param"] = True
    return out


def spec_from_json(obj) -> PotentialSpec:
    allowed = {"kind", "C", "C0", "g2", "g3", "N", "m_param"}
    extra = set(obj) - allowed
    if extra:
        raise SchemaError(f"unknown potential fields {sorted(extra)}")
    try:
        return PotentialSpec(
            kind=obj.get("kind", "rational"),
            C=obj.get("C", 1),
            C0=obj.get("C0", 0),
            g2=obj.get("g2"),
            g3=obj.get("g3"),
            N=int(obj.get("N", 12)),
            m_param=bool(obj.get("m_param", False)),
        )
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def report_to_json(rep: CommutantReport) -> dict:
    grades = {}
    for k in sorted(rep.residual_by_grade):
        grades[str(k)] = [{"dx": list(p), "coeff": ratfunc_to_json(c)} for p, c in rep.residual_by_grade[k]]
    return {"zero": rep.zero, "order": rep.order, "residual_by_grade": grades}


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)
