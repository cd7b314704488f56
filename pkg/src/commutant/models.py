"""Calogero-Moser type operators and their commutants.

The builders produce ``L = -Laplacian + sum_alpha C_alpha / <alpha, x>^2`` and
explicit commutants of order 3 (type A) and order 4 (types B and D) with
rational inverse-square potentials.  Coupling constants may be exact rationals
or names of symbolic parameters; parameters become extra, never
differentiated, ring variables after the coordinates.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Sequence

from ._backend import qq
from .diffop import DiffOp, change_coords_orthogonal, commutator, operator_from_symbol
from .laurent import laurent_along
from .linalg import solve, solve_modular
from .poly import Poly
from .ratfunc import RatFunc
from .reflection import Arrangement, RootVector, positive_system


class UnsupportedPotential(ValueError):
    pass


class IntegrationError(ArithmeticError):
    """The zeroth-order coefficient could not be integrated exactly."""

    def __init__(self, message: str, unmatched: dict | None = None):
        super().__init__(message)
        self.unmatched = unmatched or {}


def _is_symbol(c) -> bool:
    if c is None or not isinstance(c, str):
        return False
    return c.strip().isidentifier()


@dataclass
class PotentialSpec:
    """Potential data: inverse-square couplings or Weierstrass series parameters.

    ``C`` is the coupling of the pair roots ``e_i +- e_j`` and ``C0`` the one
    of the coordinate roots ``e_i``.  Either may be a rational or the name of
    a symbolic parameter.  With ``m_param`` set the values are read as ``m``
    and the coupling becomes ``m(m+1)<alpha,alpha>``.
    """

    kind: str = "rational"
    C: object = 1
    C0: object = 0
    g2: object = None
    g3: object = None
    N: int = 12
    m_param: bool = False

    def __post_init__(self):
        if self.kind not in {"rational", "wp_series"}:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        for name in ("C", "C0", "g2", "g3"):
            v = getattr(self, name)
            if v is not None and not _is_symbol(v):
                setattr(self, name, qq(v))
        if self.kind == "wp_series" and self.N < 2:
            raise ValueError("series truncation N must be at least 2")

    def param_names(self) -> list[str]:
        names = []
        for v in (self.C, self.C0):
            if _is_symbol(v) and v not in names:
                names.append(v)
        return names


def _param_value(v, names: Sequence[str], n: int) -> Poly:
    total = n + len(names)
    if _is_symbol(v):
        return Poly.var(total, n + list(names).index(v))
    return Poly.const(total, v)


def _coupling_poly(v, normsq, m_param: bool, names, n) -> Poly:
    p = _param_value(v, names, n)
    if m_param:
        return p * (p + 1) * normsq
    return p


def _root_shape(r: RootVector) -> str:
    nz = [c for c in r.coords if c != 0]
    if len(nz) == 1 and abs(nz[0]) == 1:
        return "coord"
    if len(nz) == 2 and all(abs(c) == 1 for c in nz):
        return "pair"
    return "other"


def _form(coeffs: Sequence, total: int) -> Poly:
    return Poly.linear(list(coeffs) + [0] * (total - len(coeffs)))


def build_L(arr: Arrangement, spec: PotentialSpec | None = None) -> DiffOp:
    """``-Laplacian + sum C_alpha / <alpha, x>^2`` for the roots of ``arr``."""
    if spec is not None and spec.kind != "rational":
        raise UnsupportedPotential("series potentials are only checked through the functional equation")
    n = arr.nvars
    names = spec.param_names() if spec is not None else []
    for c in arr.couplings:
        if _is_symbol(c) and c not in names:
            names.append(c)
    total = n + len(names)
    m_param = spec.m_param if spec is not None else False
    parts = []
    for r, c in zip(arr.roots, arr.couplings):
        if spec is not None:
            shape = _root_shape(r)
            if shape == "pair":
                c = spec.C
            elif shape == "coord":
                c = spec.C0
        if c is None:
            raise ValueError("arrangement has a root without a coupling")
        if not _is_symbol(c) and qq(c) == 0:
            continue
        coeff = _coupling_poly(c, r.squared_norm, m_param, names, n)
        parts.append(RatFunc.pole(_form(r.coords, total), 2, coeff))
    R = RatFunc.sum(parts, nvars=total)
    return DiffOp.laplacian(n, len(names)) * -1 + DiffOp.multiplication(R, n, len(names))


def _pair_term(n, names, i, j, sign, coeff_poly) -> RatFunc:
    """``coeff / (x_i + sign x_j)^2``."""
    total = n + len(names)
    v = [0] * n
    v[i] = 1
    v[j] = sign
    return RatFunc.pole(_form(v, total), 2, coeff_poly)


def build_P_typeA(n: int, spec: PotentialSpec | None = None) -> DiffOp:
    """Third-order commutant ``sum d_i d_j d_k + sum_i a_1^i d_i`` of the type A operator."""
    if n < 3:
        raise ValueError("type A commutant needs n >= 3")
    spec = spec or PotentialSpec()
    if spec.kind != "rational":
        raise UnsupportedPotential("series potentials are only checked through the functional equation")
    names = spec.param_names()
    total = n + len(names)
    C = _coupling_poly(spec.C, 2, spec.m_param, names, n)
    terms: dict[tuple, RatFunc] = {}
    one = RatFunc.one(total)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                p = [0] * n
                p[i] = p[j] = p[k] = 1
                terms[tuple(p)] = one
    if not C.is_zero():
        half = C.scale(qq("1/2"))
        for i in range(n):
            others = [j for j in range(n) if j != i]
            parts = [
                _pair_term(n, names, j, k, -1, half)
                for a, j in enumerate(others)
                for k in others[a + 1:]
            ]
            p = [0] * n
            p[i] = 1
            terms[tuple(p)] = RatFunc.sum(parts, nvars=total)
    return DiffOp(n, terms, len(names))


@dataclass
class BDParts:
    """Coefficients of the order-four commutant before and after integration."""

    a2: list
    a11: dict
    a1: list
    a0: RatFunc
    gradient: list
    basis_size: int = 0


def _bd_coefficients(n: int, spec: PotentialSpec, kind: str):
    names = spec.param_names()
    total = n + len(names)
    C = _coupling_poly(spec.C, 2, spec.m_param, names, n)
    C0 = _coupling_poly(spec.C0, 1, spec.m_param, names, n) if kind == "B" else Poly.zero(total)

    def u(i, j, sign):
        if C.is_zero():
            return RatFunc.zero(total)
        return _pair_term(n, names, i, j, sign, C)

    def v(j):
        if C0.is_zero():
            return RatFunc.zero(total)
        e = [0] * n
        e[j] = 1
        return RatFunc.pole(_form(e, total), 2, C0)

    a2 = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        parts = []
        for a, j in enumerate(others):
            for k in others[a + 1:]:
                parts.append(u(j, k, 1))
                parts.append(u(j, k, -1))
            parts.append(v(j))
        a2.append(-RatFunc.sum(parts, nvars=total))
    a11 = {}
    for i in range(n):
        for j in range(i + 1, n):
            a11[(i, j)] = u(i, j, -1) - u(i, j, 1)

    def A11(i, j):
        return a11[(min(i, j), max(i, j))]

    a1 = []
    for i in range(n):
        parts = [a2[i].diff(i)]
        for j in range(n):
            if j != i:
                parts.append(A11(i, j).diff(j) * qq("1/2"))
        a1.append(RatFunc.sum(parts, nvars=total))
    return names, total, a2, a11, a1, A11


def _pole_factors(n: int, spec: PotentialSpec, kind: str, names, total) -> list[RatFunc]:
    out = []
    C_zero = not _is_symbol(spec.C) and spec.C == 0
    C0_zero = kind == "D" or (not _is_symbol(spec.C0) and spec.C0 == 0)
    if not C_zero:
        for i in range(n):
            for j in range(i + 1, n):
                for s in (1, -1):
                    v = [0] * n
                    v[i] = 1
                    v[j] = s
                    out.append(RatFunc.pole(_form(v, total), 2))
    if not C0_zero:
        for i in range(n):
            e = [0] * n
            e[i] = 1
            out.append(RatFunc.pole(_form(e, total), 2))
    return out


def _param_monomials(nparams: int, total: int, max_deg: int = 2) -> list[RatFunc]:
    n = total - nparams
    out = []
    for d in range(max_deg + 1):
        for combo in combinations_with_replacement(range(nparams), d):
            e = [0] * total
            for k in combo:
                e[n + k] += 1
            out.append(RatFunc.from_poly(Poly(total, {tuple(e): 1})))
    return out


def _sample_point(rng: random.Random, total: int, dens: Sequence[RatFunc]):
    while True:
        pt = [qq(rng.randint(-60, 60)) / rng.randint(1, 7) for _ in range(total)]
        try:
            for f in dens:
                f.evaluate(pt)
            return pt
        except ZeroDivisionError:
            continue


def integrate_gradient(g: Sequence[RatFunc], n: int, basis: Sequence[RatFunc], seed: int = 0) -> RatFunc:
    """Find ``a`` in the span of ``basis`` with ``d_i a = g_i`` for ``i < n``.

    Coefficients are fitted at random rational points and then the result is
    verified exactly; a mismatch raises :class:`IntegrationError`.
    """
    total = g[0].nvars
    for i in range(n):
        for j in range(i + 1, n):
            if g[i].diff(j) != g[j].diff(i):
                raise IntegrationError(f"gradient is not closed in the pair ({i + 1}, {j + 1})")
    if all(gi.is_zero() for gi in g):
        return RatFunc.zero(total)
    dbasis = [[b.diff(i) for b in basis] for i in range(n)]
    rng = random.Random(seed)
    rows, rhs = [], []
    needed = 2 * len(basis) + 8
    samples = [*basis, *g]
    while len(rows) < needed:
        pt = _sample_point(rng, total, samples)
        for i in range(n):
            rows.append([db.evaluate(pt) for db in dbasis[i]])
            rhs.append(g[i].evaluate(pt))
    def residual(coeffs):
        a = RatFunc.sum([b * c for b, c in zip(basis, coeffs) if c != 0], nvars=total)
        bad = {}
        for i in range(n):
            r = a.diff(i) - g[i]
            if not r.is_zero():
                bad[i] = r
        return a, bad

    # fast path: modular elimination, then exact verification
    coeffs = solve_modular(rows, rhs)
    if coeffs is not None:
        a, unmatched = residual(coeffs)
        if not unmatched:
            return a
    coeffs = solve(rows, rhs)
    if coeffs is None:
        raise IntegrationError("gradient is not in the span of the ansatz")
    a, unmatched = residual(coeffs)
    if unmatched:
        raise IntegrationError("ansatz does not reproduce the gradient", unmatched)
    return a


def bd_gradient_formula(n: int, R: RatFunc, a2, A11, a1) -> list[RatFunc]:
    """``d_i a_0`` from the first-order part of the commutation relation.

    ``-2 d_i a_0 = 2 sum_{j != i} d_i d_j^2 R + 2 a_2^i d_i R
    + sum_{j != i} a_11^{ij} d_j R + Laplacian(a_1^i)``.
    """
    total = R.nvars
    grads = []
    for i in range(n):
        parts = [a2[i] * R.diff(i) * 2]
        for j in range(n):
            if j != i:
                parts.append(R.diff(i).diff(j, 2) * 2)
                parts.append(A11(i, j) * R.diff(j))
            parts.append(a1[i].diff(j, 2))
        grads.append(RatFunc.sum(parts, nvars=total) * qq("-1/2"))
    return grads


def build_P_typeBD(n: int, spec: PotentialSpec | None = None, kind: str = "B", *, details: bool = False):
    """Fourth-order self-adjoint commutant for the B or D operator.

    ``a_0`` is obtained by integrating its gradient over an ansatz of
    products of at most two pole factors; the gradient is taken from the
    first-order relation and cross-checked against the first-order part of
    ``[L, P]`` computed without ``a_0``.
    """
    spec = spec or PotentialSpec()
    kind = kind.upper()
    if spec.kind != "rational":
        raise UnsupportedPotential("series potentials are only checked through the functional equation")
    if kind not in {"B", "D"}:
        raise ValueError("kind must be 'B' or 'D'")
    if kind == "B" and n < 2:
        raise ValueError("type B commutant needs n >= 2")
    if kind == "D":
        if n < 3:
            raise ValueError("type D commutant needs n >= 3")
        if _is_symbol(spec.C0) or spec.C0 != 0:
            raise ValueError("type D has no coordinate roots; C0 must be 0")
    names, total, a2, a11, a1, A11 = _bd_coefficients(n, spec, kind)
    nparams = len(names)
    terms: dict[tuple, RatFunc] = {}
    one = RatFunc.one(total)

    for i in range(n):
        for j in range(i + 1, n):
            p = [0] * n
            p[i] = p[j] = 2
            terms[tuple(p)] = one
    for i in range(n):
        p = [0] * n
        p[i] = 2
        terms[tuple(p)] = a2[i]
        p = [0] * n
        p[i] = 1
        terms[tuple(p)] = a1[i]
    for (i, j), a in a11.items():
        p = [0] * n
        p[i] = p[j] = 1
        terms[tuple(p)] = a
    P_top = DiffOp(n, terms, nparams)

    L = build_L(positive_system(kind, n) if not (kind == "D" and n == 3) else _d3_system(), spec)
    R = L.coeff((0,) * n)
    grad = bd_gradient_formula(n, R, a2, A11, a1)
    # second route: first-order coefficients of [L, P_top] equal 2 d_i a_0
    comm = commutator(L, P_top)
    for p, c in comm.terms.items():
        if sum(p) >= 2:
            raise IntegrationError(f"[L, P] has a surviving term of order {sum(p)} at {p}")
    for i in range(n):
        e = [0] * n
        e[i] = 1
        route2 = comm.coeff(tuple(e)) * qq("1/2")
        if route2 != grad[i]:
            raise IntegrationError(f"gradient routes disagree in coordinate {i + 1}", {i: route2 - grad[i]})

    factors = _pole_factors(n, spec, kind, names, total)
    pmon = _param_monomials(nparams, total)
    basis = []
    for k in (1, 2):
        for combo in combinations_with_replacement(range(len(factors)), k):
            f = factors[combo[0]]
            for c in combo[1:]:
                f = f * factors[c]
            basis.extend(f * m for m in pmon)
    a0 = integrate_gradient(grad, n, basis) if factors else RatFunc.zero(total)
    if not a0.is_zero():
        terms[(0,) * n] = a0
    P = DiffOp(n, terms, nparams)
    if details:
        return P, BDParts(a2, a11, a1, a0, grad, len(basis))
    return P


def _d3_system() -> Arrangement:
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return positive_system("D", 3)


def build_pair(kind: str, n: int, spec: PotentialSpec | None = None) -> tuple[DiffOp, DiffOp]:
    """``(L, P)`` for a classical type with the builders' canonical commutant."""
    spec = spec or PotentialSpec()
    kind = kind.upper()
    if kind == "A":
        P = build_P_typeA(n, spec)
        return build_L(positive_system("A", n), spec), P
    if kind in {"B", "D"}:
        P = build_P_typeBD(n, spec, kind)
        arr = _d3_system() if (kind == "D" and n == 3) else positive_system(kind, n)
        return build_L(arr, spec), P
    raise ValueError(f"unknown type {kind!r}")


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass
class CommutantReport:
    zero: bool
    residual_by_grade: dict = field(default_factory=dict)
    order: int = 0

    def first_grade(self) -> int | None:
        return min(self.residual_by_grade) if self.residual_by_grade else None


def verify_commutant(L: DiffOp, P: DiffOp) -> CommutantReport:
    """Exact ``[L, P]`` sorted by grade ``k = ord(P) - |p|``."""
    if L.nparams != P.nparams:
        m = max(L.nparams, P.nparams)
        L, P = L.with_params(m), P.with_params(m)
    res = commutator(L, P)
    m0 = P.order()
    graded: dict[int, list] = {}
    for p in sorted(res.terms, key=lambda q: (-sum(q), q)):
        graded.setdefault(m0 - sum(p), []).append((p, res.terms[p]))
    return CommutantReport(not graded, graded, m0)


# ---------------------------------------------------------------------------
# Weierstrass series and the type A functional equation
# ---------------------------------------------------------------------------

@dataclass
class WpSeries:
    """``t^-2 + sum_{k=2}^{N} c_k t^(2k-2)`` with ``c_k`` in ``Q[g2, g3]``."""

    N: int
    coeffs: dict  # k -> Poly in (g2, g3)
    g2: object = None
    g3: object = None

    def coefficient(self, k: int) -> Poly:
        if k == 0:
            return Poly.one(2)
        return self.coeffs.get(k, Poly.zero(2))

    def as_laurent(self) -> dict:
        """Exponent of ``t`` -> coefficient."""
        out = {-2: Poly.one(2)}
        for k, c in self.coeffs.items():
            if not c.is_zero():
                out[2 * k - 2] = c
        return out


def _wp_coeff_list(g2: Poly, g3: Poly, kmax: int) -> dict:
    c = {2: g2.scale(qq("1/20")), 3: g3.scale(qq("1/28"))}
    for k in range(4, kmax + 1):
        s = Poly.zero(2)
        for m in range(2, k - 1):
            s = s + c[m] * c[k - m]
        c[k] = s.scale(qq(3) / ((2 * k + 1) * (k - 3)))
    return {k: v for k, v in c.items() if k <= kmax}


def _gvalue(v, i: int) -> Poly:
    if v is None or _is_symbol(v):
        return Poly.var(2, i)
    return Poly.const(2, v)


def wp_series(g2=None, g3=None, N: int = 12) -> WpSeries:
    """Truncated Laurent series of the Weierstrass function.

    ``g2`` / ``g3`` left as ``None`` (or given as names) stay symbolic.  The
    differential equation is checked on the way out: the residual of
    ``(wp')^2 - 4 wp^3 + g2 wp + g3`` must vanish below ``t^(2N-4)`` and its
    ``t^(2N-4)`` coefficient must equal ``(8N+12) c_{N+1}``, which cancels
    the contribution of the first dropped term.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    G2, G3 = _gvalue(g2, 0), _gvalue(g3, 1)
    coeffs = _wp_coeff_list(G2, G3, N + 1)
    nxt = coeffs.pop(N + 1) if N + 1 in coeffs else Poly.zero(2)
    coeffs = {k: v for k, v in coeffs.items() if k <= N}
    s = WpSeries(N, coeffs, g2, g3)
    res = wp_de_residual(s)
    for e, c in res.items():
        if e < 2 * N - 4 and not c.is_zero():
            raise ArithmeticError(f"Weierstrass recursion failed at t^{e}")
    if res.get(2 * N - 4, Poly.zero(2)) != nxt.scale(8 * N + 12):
        raise ArithmeticError("Weierstrass recursion: unexpected truncation residual")
    return s


def _series_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = ea + eb
            out[e] = out[e] + ca * cb if e in out else ca * cb
    return {e: c for e, c in out.items() if not c.is_zero()}


def wp_de_residual(s: WpSeries) -> dict:
    """Laurent coefficients of ``(wp')^2 - 4 wp^3 + g2 wp + g3`` for the truncation."""
    wp = s.as_laurent()
    dwp = {e - 1: c.scale(e) for e, c in wp.items() if e != 0}
    G2, G3 = _gvalue(s.g2, 0), _gvalue(s.g3, 1)
    out = _series_mul(dwp, dwp)
    cube = _series_mul(_series_mul(wp, wp), wp)
    for e, c in cube.items():
        out[e] = out.get(e, Poly.zero(2)) - c.scale(4)
    for e, c in wp.items():
        out[e] = out.get(e, Poly.zero(2)) + G2 * c
    out[0] = out.get(0, Poly.zero(2)) + G3
    return {e: c for e, c in sorted(out.items()) if not c.is_zero()}


def wp_residual_vanishes_through(s: WpSeries, order: int) -> tuple[bool, int | None]:
    """Whether every residual coefficient of ``t^e`` with ``e < order`` is zero."""
    for e, c in wp_de_residual(s).items():
        if e < order and not c.is_zero():
            return False, e
    return True, None


@dataclass
class FunctionalEqResult:
    holds: bool
    first_failing_order: int | None = None
    checked_through: int | None = None
    residual: object = None


def _pair_triples(n: int):
    for i in range(n):
        for j in range(i + 1, n):
            yield i, j, [p for p in range(n) if p not in (i, j)]


def _diff_form(n: int, a: int, b: int, total: int) -> list:
    """Row for ``t -> x_min(a,b) - x_max(a,b)``; even/odd handled by the caller."""
    row = [0] * total
    row[a] += 1
    row[b] -= 1
    return row


def _functional_lhs(n: int, u_of, du_of, total: int) -> RatFunc:
    """Left side of the type A functional equation for given ``u`` and ``u'``.

    ``u_of(a, b)`` returns ``u_{ab}(x_a - x_b)`` using the convention
    ``u_{ab}(t) = u_{ba}(-t)``; ``du_of(i, j)`` returns ``u_{ij}'(x_i - x_j)``.
    """
    parts = []
    for i, j, others in _pair_triples(n):
        inner = RatFunc.sum([u_of(p, j) - u_of(p, i) for p in others], nvars=total)
        if inner.is_zero():
            continue
        parts.append(inner * du_of(i, j))
    return RatFunc.sum(parts, nvars=total)


def functional_equation_check(n: int, u) -> FunctionalEqResult:
    """Check ``sum_{i<j} (sum_{p != i,j} (u_pj - u_pi)) u_ij' = 0``.

    ``u`` is a one-variable :class:`RatFunc` (extra variables are parameters)
    or a :class:`WpSeries`; the series case is checked weight by weight.
    """
    if n < 3:
        raise ValueError("the functional equation needs n >= 3")
    if isinstance(u, WpSeries):
        return _functional_series(n, u)
    if not isinstance(u, RatFunc):
        raise TypeError("u must be a RatFunc in t or a WpSeries")
    nparams = u.nvars - 1
    total = n + nparams
    du = u.diff(0)

    def subst(f: RatFunc, a: int, b: int) -> RatFunc:
        rows = [_diff_form(n, a, b, total)]
        for k in range(nparams):
            r = [0] * total
            r[n + k] = 1
            rows.append(r)
        return f.compose_linear(rows, total)

    def u_of(a, b):
        # u_{ab}(x_a - x_b) with u_{ab}(t) = u(t) for a < b and u(-t) otherwise
        return subst(u, a, b) if a < b else subst(u, b, a)

    def du_of(i, j):
        return subst(du, i, j)

    lhs = _functional_lhs(n, u_of, du_of, total)
    if lhs.is_zero():
        return FunctionalEqResult(True)
    e = [1, -1] + [0] * (total - 2)
    sl = laurent_along(lhs, e, 0)
    first = sl.min_order if sl.coeffs else None
    return FunctionalEqResult(False, first, None, lhs)


def _functional_series(n: int, s: WpSeries) -> FunctionalEqResult:
    """Weight-graded check for the truncated Weierstrass series.

    With ``wp = sum_k c_k t^(2k-2)`` (``c_0 = 1``, ``c_1 = 0``) the left side
    splits into parts of weight ``w = k + l`` collecting ``c_k c_l`` times
    a rational function of ``x``.  Monomials ``g2^a g3^b`` of weight
    ``2a + 3b = w`` never mix across weights, so an exact solution makes
    every part vanish; the truncation determines all parts with ``w <= N``.
    """
    N = s.N
    total = n + 2  # x, g2, g3
    c = {0: Poly.one(2)}
    c.update(s.coeffs)

    def lift(p: Poly) -> RatFunc:
        return RatFunc.from_poly(p.embed(total, [n, n + 1]))

    def power_term(a, b, e) -> RatFunc:
        lo, hi = min(a, b), max(a, b)
        form = _form(_diff_form(n, lo, hi, n), total)
        return RatFunc.pole(form, -e) if e < 0 else RatFunc.from_poly(form**e)

    cache: dict = {}

    def G(k: int, l: int) -> RatFunc:
        """Part of the left side from ``t^(2k-2)`` in ``u`` and ``t^(2l-2)`` in ``u'``."""
        key = (k, l)
        if key in cache:
            return cache[key]
        ek, el = 2 * k - 2, 2 * l - 2
        if el == 0:
            cache[key] = RatFunc.zero(total)
            return cache[key]

        def u_of(a, b):
            return power_term(a, b, ek)

        def du_of(i, j):
            return power_term(i, j, el - 1) * el

        cache[key] = _functional_lhs(n, u_of, du_of, total)
        return cache[key]

    for w in range(N + 1):
        parts = []
        for k in range(w + 1):
            l = w - k
            if k == 1 or l == 1 or k not in c or l not in c:
                continue
            coeff = c[k] * c[l]
            if coeff.is_zero():
                continue
            g = G(k, l)
            if not g.is_zero():
                parts.append(g * lift(coeff))
        Fw = RatFunc.sum(parts, nvars=total)
        if not Fw.is_zero():
            return FunctionalEqResult(False, w, w - 1, Fw)
    return FunctionalEqResult(True, None, N)


# ---------------------------------------------------------------------------
# the D4 change of coordinates
# ---------------------------------------------------------------------------

def d4_matrix(sign: int) -> list[list]:
    s = 1 if sign >= 0 else -1
    h = qq("1/2")
    rows = [[1, s, s, s], [s, 1, -1, -1], [s, -1, 1, -1], [s, -1, -1, 1]]
    return [[h * v for v in r] for r in rows]


def d4_twist_check(sign: int | None = 1) -> bool:
    """Whether the twisted D4 symbol is carried to ``(3/4) sum xi^4 - (1/2) sum xi_i^2 xi_j^2``.

    ``sign`` picks the twist ``+-6 d1 d2 d3 d4`` and the matching matrix;
    ``None`` runs the control without the twist term (plus-sign matrix).
    """
    xi = [Poly.var(4, i) for i in range(4)]
    base = Poly.zero(4)
    for i in range(4):
        for j in range(i + 1, 4):
            base = base + xi[i] ** 2 * xi[j] ** 2
    if sign is None:
        sym, M = base, d4_matrix(1)
    else:
        s = 1 if sign >= 0 else -1
        sym, M = base + (xi[0] * xi[1] * xi[2] * xi[3]).scale(6 * s), d4_matrix(s)
    target = Poly.zero(4)
    for i in range(4):
        target = target + (xi[i] ** 4).scale(qq("3/4"))
    target = target - base.scale(qq("1/2"))
    out = change_coords_orthogonal(operator_from_symbol(sym), M)
    return out == operator_from_symbol(target)


# interface name kept for callers of the original operation list
functional_eq_A7_check = functional_equation_check
