"""Differential operators with rational-function coefficients.

A :class:`DiffOp` is a finite sum ``sum_p a_p(x) d^p`` over multi-indices ``p``
of length ``nvars``.  Coefficients are :class:`RatFunc` values in
``nvars + nparams`` variables: the trailing ``nparams`` variables are symbolic
parameters (coupling constants and the like) that operators never
differentiate.
"""

from __future__ import annotations

from itertools import product
from math import comb
from typing import Iterable, Mapping, Sequence

from ._backend import qq
from .linalg import as_matrix, inverse, is_orthogonal
from .poly import Poly
from .ratfunc import RatFunc

MultiIndex = tuple


def _binom_multi(p: MultiIndex, r: MultiIndex) -> int:
    out = 1
    for a, b in zip(p, r):
        out *= comb(a, b)
    return out


def _sub_indices(p: MultiIndex) -> Iterable[MultiIndex]:
    return product(*(range(k + 1) for k in p))


class DiffOp:
    __slots__ = ("nvars", "nparams", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[MultiIndex, RatFunc] | None = None, nparams: int = 0):
        self.nvars = nvars
        self.nparams = nparams
        clean = {}
        total = nvars + nparams
        for p, a in (terms or {}).items():
            p = tuple(int(k) for k in p)
            if len(p) != nvars or any(k < 0 for k in p):
                raise ValueError(f"bad multi-index {p} for {nvars} variables")
            if not isinstance(a, RatFunc):
                a = RatFunc.from_poly(a) if isinstance(a, Poly) else RatFunc.const(total, a)
            if a.nvars != total:
                raise ValueError("coefficient lives in the wrong number of variables")
            if not a.is_zero():
                clean[p] = a
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, nparams: int, terms: dict) -> "DiffOp":
        d = object.__new__(cls)
        d.nvars = nvars
        d.nparams = nparams
        d.terms = terms
        d._hash = None
        return d

    # -- constructors -------------------------------------------------------
    @property
    def ring_vars(self) -> int:
        return self.nvars + self.nparams

    @classmethod
    def zero(cls, nvars: int, nparams: int = 0) -> "DiffOp":
        return cls._raw(nvars, nparams, {})

    @classmethod
    def multiplication(cls, f, nvars: int, nparams: int = 0) -> "DiffOp":
        """The zeroth-order operator ``u -> f u``."""
        total = nvars + nparams
        if not isinstance(f, RatFunc):
            f = RatFunc.from_poly(f) if isinstance(f, Poly) else RatFunc.const(total, f)
        return cls(nvars, {(0,) * nvars: f}, nparams)

    @classmethod
    def identity(cls, nvars: int, nparams: int = 0) -> "DiffOp":
        return cls.multiplication(1, nvars, nparams)

    @classmethod
    def monomial(cls, p: Sequence[int], coeff=1, nparams: int = 0) -> "DiffOp":
        nvars = len(p)
        total = nvars + nparams
        if not isinstance(coeff, RatFunc):
            coeff = RatFunc.from_poly(coeff) if isinstance(coeff, Poly) else RatFunc.const(total, coeff)
        return cls(nvars, {tuple(p): coeff}, nparams)

    @classmethod
    def partial(cls, nvars: int, i: int, times: int = 1, nparams: int = 0) -> "DiffOp":
        p = [0] * nvars
        p[i] = times
        return cls.monomial(p, 1, nparams)

    @classmethod
    def laplacian(cls, nvars: int, nparams: int = 0) -> "DiffOp":
        total = nvars + nparams
        one = RatFunc.one(total)
        terms = {}
        for i in range(nvars):
            p = [0] * nvars
            p[i] = 2
            terms[tuple(p)] = one
        return cls._raw(nvars, nparams, terms)

    @classmethod
    def sum_of_partials(cls, nvars: int, nparams: int = 0) -> "DiffOp":
        total = nvars + nparams
        one = RatFunc.one(total)
        terms = {}
        for i in range(nvars):
            p = [0] * nvars
            p[i] = 1
            terms[tuple(p)] = one
        return cls._raw(nvars, nparams, terms)

    # -- basic queries --------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        if not self.terms:
            return -1
        return max(sum(p) for p in self.terms)

    def coeff(self, p: Sequence[int]) -> RatFunc:
        return self.terms.get(tuple(p), RatFunc.zero(self.ring_vars))

    def _check(self, other: "DiffOp"):
        if self.nvars != other.nvars or self.nparams != other.nparams:
            raise ValueError("operators act on different variable sets")

    def with_params(self, nparams: int) -> "DiffOp":
        """Re-embed the coefficients into a ring with more parameters."""
        if nparams == self.nparams:
            return self
        if nparams < self.nparams:
            raise ValueError("cannot drop parameters")
        total = self.nvars + nparams
        mapping = list(range(self.ring_vars))
        return DiffOp._raw(
            self.nvars, nparams, {p: a.embed(total, mapping) for p, a in self.terms.items()}
        )

    # -- linear structure ---------------------------------------------------
    def __add__(self, other: "DiffOp") -> "DiffOp":
        self._check(other)
        out = dict(self.terms)
        for p, a in other.terms.items():
            b = out.get(p)
            if b is None:
                out[p] = a
            else:
                s = b + a
                if s.is_zero():
                    del out[p]
                else:
                    out[p] = s
        return DiffOp._raw(self.nvars, self.nparams, out)

    def __neg__(self) -> "DiffOp":
        return DiffOp._raw(self.nvars, self.nparams, {p: -a for p, a in self.terms.items()})

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def scale(self, f) -> "DiffOp":
        """Left multiplication by a function or constant: ``f * D``."""
        if not isinstance(f, RatFunc):
            f = RatFunc.from_poly(f) if isinstance(f, Poly) else RatFunc.const(self.ring_vars, f)
        if f.is_zero():
            return DiffOp.zero(self.nvars, self.nparams)
        return DiffOp._raw(self.nvars, self.nparams, {p: f * a for p, a in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, DiffOp):
            return compose(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    @staticmethod
    def sum(ops: Iterable["DiffOp"], nvars: int, nparams: int = 0) -> "DiffOp":
        acc: dict[MultiIndex, list[RatFunc]] = {}
        for d in ops:
            if d.nvars != nvars or d.nparams != nparams:
                raise ValueError("operators act on different variable sets")
            for p, a in d.terms.items():
                acc.setdefault(p, []).append(a)
        return _collect(nvars, nparams, acc)

    # -- comparison -----------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.nvars == other.nvars and self.nparams == other.nparams and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, self.nparams, frozenset(self.terms.items())))
        return self._hash

    # -- application ----------------------------------------------------------
    def apply(self, f: RatFunc) -> RatFunc:
        """``D f`` for a rational function ``f``."""
        parts = []
        for p, a in self.terms.items():
            g = f
            for i, k in enumerate(p):
                if k:
                    g = g.diff(i, k)
            parts.append(a * g)
        return RatFunc.sum(parts, nvars=self.ring_vars)

    # -- printing -----------------------------------------------------------
    def to_str(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = list(names) if names else [f"x{i + 1}" for i in range(self.ring_vars)]
        parts = []
        for p in sorted(self.terms, key=lambda q: (-sum(q), tuple(-k for k in q))):
            a = self.terms[p]
            d = "*".join(
                (f"d{i + 1}" if k == 1 else f"d{i + 1}^{k}") for i, k in enumerate(p) if k
            )
            c = a.to_str(names)
            if not d:
                parts.append(f"({c})")
            elif a.is_constant() and a.constant_value() == 1:
                parts.append(d)
            else:
                parts.append(f"({c})*{d}")
        return " + ".join(parts)

    def __repr__(self):
        return f"DiffOp({self.to_str()})"


def _collect(nvars: int, nparams: int, acc: Mapping[MultiIndex, list]) -> DiffOp:
    out = {}
    total = nvars + nparams
    for p, items in acc.items():
        s = items[0] if len(items) == 1 else RatFunc.sum(items, nvars=total)
        if not s.is_zero():
            out[p] = s
    return DiffOp._raw(nvars, nparams, out)


class _DerivCache:
    """Memoized partial derivatives of one coefficient."""

    def __init__(self, f: RatFunc):
        self.f = f
        self.cache: dict[MultiIndex, RatFunc] = {}

    def get(self, r: MultiIndex) -> RatFunc:
        if not any(r):
            return self.f
        hit = self.cache.get(r)
        if hit is not None:
            return hit
        # differentiate once from the next lower index
        i = max(j for j, k in enumerate(r) if k)
        lower = r[:i] + (r[i] - 1,) + r[i + 1:]
        out = self.get(lower).diff(i)
        self.cache[r] = out
        return out


def compose(d1: DiffOp, d2: DiffOp) -> DiffOp:
    """Operator product ``d1 o d2`` by the Leibniz rule."""
    d1._check(d2)
    n = d1.nvars
    caches = {q: _DerivCache(b) for q, b in d2.terms.items()}
    acc: dict[MultiIndex, list[RatFunc]] = {}
    for p, a in d1.terms.items():
        for r in _sub_indices(p):
            c = _binom_multi(p, r)
            rest = tuple(pi - ri for pi, ri in zip(p, r))
            for q, cache in caches.items():
                db = cache.get(r)
                if db.is_zero():
                    continue
                term = a * db
                if c != 1:
                    term = term * c
                key = tuple(x + y for x, y in zip(rest, q))
                acc.setdefault(key, []).append(term)
    return _collect(n, d1.nparams, acc)


def commutator(d1: DiffOp, d2: DiffOp) -> DiffOp:
    return compose(d1, d2) - compose(d2, d1)


def adjoint(d: DiffOp) -> DiffOp:
    """Formal adjoint ``sum_p (-1)^|p| d^p o a_p``."""
    acc: dict[MultiIndex, list[RatFunc]] = {}
    for p, a in d.terms.items():
        cache = _DerivCache(a)
        sign = -1 if sum(p) % 2 else 1
        for r in _sub_indices(p):
            c = _binom_multi(p, r) * sign
            da = cache.get(r)
            if da.is_zero():
                continue
            key = tuple(pi - ri for pi, ri in zip(p, r))
            acc.setdefault(key, []).append(da * c)
    return _collect(d.nvars, d.nparams, acc)


def parity_check(d: DiffOp) -> str:
    """``self_adjoint``, ``skew_adjoint`` or ``neither``."""
    t = adjoint(d)
    if t == d:
        return "self_adjoint"
    if t == -d:
        return "skew_adjoint"
    return "neither"


# ---------------------------------------------------------------------------
# symbols
# ---------------------------------------------------------------------------

class SymbolPoly:
    """Polynomial in ``x`` (including parameters) and ``xi`` jointly."""

    __slots__ = ("nvars", "nparams", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple, object], nparams: int = 0):
        self.nvars = nvars
        self.nparams = nparams
        self.terms = {k: qq(c) for k, c in terms.items() if c != 0}

    @classmethod
    def from_part(cls, part: Mapping[MultiIndex, RatFunc], nvars: int, nparams: int = 0) -> "SymbolPoly":
        terms = {}
        for xi, a in part.items():
            if not a.is_poly():
                raise ValueError("coefficient is not a polynomial")
            for e, c in a.num.terms.items():
                terms[(e, xi)] = c
        return cls(nvars, terms, nparams)

    def xi_degree(self) -> int:
        return max((sum(k[1]) for k in self.terms), default=-1)

    def grade(self, d: int) -> "SymbolPoly":
        """The part of xi-degree exactly ``d``."""
        return SymbolPoly(self.nvars, {k: c for k, c in self.terms.items() if sum(k[1]) == d}, self.nparams)

    def as_poly(self) -> Poly:
        """Flatten to a :class:`Poly` in ``(x, params, xi)``."""
        total = 2 * self.nvars + self.nparams
        return Poly(total, {xe + xi: c for (xe, xi), c in self.terms.items()})

    def is_constant_in_x(self) -> bool:
        return all(not any(xe) for xe, _ in self.terms)

    def xi_poly(self) -> Poly:
        """The xi-polynomial when all coefficients are constants."""
        if not self.is_constant_in_x():
            raise ValueError("symbol depends on x")
        return Poly(self.nvars, {xi: c for (_, xi), c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, SymbolPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        return f"SymbolPoly({self.as_poly().to_str()})"


def symbol_parts(d: DiffOp) -> list[dict[MultiIndex, RatFunc]]:
    """Graded symbols: entry ``k`` collects the terms with ``|p| = ord(d) - k``."""
    m = d.order()
    if m < 0:
        return []
    parts: list[dict] = [dict() for _ in range(m + 1)]
    for p, a in d.terms.items():
        parts[m - sum(p)][p] = a
    return parts


def symbol_polys(d: DiffOp) -> list[SymbolPoly]:
    """Graded symbols as :class:`SymbolPoly` values (polynomial coefficients only)."""
    return [SymbolPoly.from_part(part, d.nvars, d.nparams) for part in symbol_parts(d)]


def principal_symbol(d: DiffOp) -> dict[MultiIndex, RatFunc]:
    parts = symbol_parts(d)
    return parts[0] if parts else {}


def constant_principal_symbol(d: DiffOp) -> Poly:
    """Principal symbol as a polynomial in ``xi`` when its coefficients are constants."""
    top = principal_symbol(d)
    terms = {}
    for p, a in top.items():
        if not a.is_constant():
            raise ValueError("principal symbol has non-constant coefficients")
        terms[p] = a.constant_value()
    return Poly(d.nvars, terms)


def operator_from_symbol(sym: Poly, nparams: int = 0) -> DiffOp:
    """Constant-coefficient operator ``sigma(d)`` for a polynomial ``sigma(xi)``."""
    n = sym.nvars
    total = n + nparams
    return DiffOp(n, {e: RatFunc.const(total, c) for e, c in sym.terms.items()}, nparams)


# ---------------------------------------------------------------------------
# linear changes of coordinates
# ---------------------------------------------------------------------------

def _partial_power_in_new(M, p: MultiIndex) -> dict[MultiIndex, object]:
    """Expand ``prod_i (sum_j M[j][i] d_yj)^p_i`` into constant coefficients."""
    n = len(p)
    forms = [Poly.linear([M[j][i] for j in range(n)]) for i in range(n)]
    out = Poly.one(n)
    for i, k in enumerate(p):
        if k:
            out = out * forms[i] ** k
    return out.terms


def change_coords_linear(d: DiffOp, M: Sequence[Sequence]) -> DiffOp:
    """Rewrite ``d`` in the coordinates ``y = M x``."""
    M = as_matrix(M)
    n = d.nvars
    if len(M) != n or any(len(r) != n for r in M):
        raise ValueError("coordinate matrix must be nvars x nvars")
    Minv = inverse(M)
    rows = [list(r) + [0] * d.nparams for r in Minv]
    total = d.ring_vars
    for j in range(d.nparams):
        rows.append([0] * (n + j) + [1] + [0] * (d.nparams - j - 1))
    acc: dict[MultiIndex, list[RatFunc]] = {}
    for p, a in d.terms.items():
        a_new = a.compose_linear(rows, total)
        for q, c in _partial_power_in_new(M, p).items():
            acc.setdefault(q, []).append(a_new * c)
    return _collect(n, d.nparams, acc)


def change_coords_orthogonal(d: DiffOp, A: Sequence[Sequence]) -> DiffOp:
    A = as_matrix(A)
    if not is_orthogonal(A):
        raise ValueError("matrix is not orthogonal")
    return change_coords_linear(d, A)

