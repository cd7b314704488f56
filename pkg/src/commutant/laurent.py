"""Laurent expansion of rational functions along a hyperplane.

For a linear form ``l(x) = <alpha, x>`` the expansion is carried out in the
scaled frame ``f_1 = alpha, f_2, ..., f_N`` obtained by exact Gram-Schmidt on
the standard basis.  The frame is orthogonal but not normalized, so every
coordinate ``y_i = <f_i, x>`` stays rational and ``x = sum_i y_i f_i / |f_i|^2``.
Coefficients of the expansion are rational functions of the complementary
coordinates ``y_2, ..., y_N``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Sequence

from ._backend import ONE, ZERO, qq
from .linalg import dot
from .poly import Poly
from .ratfunc import RatFunc


class LaurentError(ValueError):
    """Raised when a function cannot be expanded along the requested form."""


@dataclass(frozen=True)
class LinearForm:
    coeffs: tuple

    def __init__(self, coeffs: Sequence):
        cs = tuple(qq(c) for c in coeffs)
        if not cs or all(c == 0 for c in cs):
            raise ValueError("a linear form needs a nonzero coefficient")
        object.__setattr__(self, "coeffs", cs)

    @property
    def nvars(self) -> int:
        return len(self.coeffs)

    def normsq(self):
        return dot(self.coeffs, self.coeffs)

    def to_poly(self, nvars: int | None = None) -> Poly:
        n = nvars if nvars is not None else self.nvars
        cs = list(self.coeffs) + [ZERO] * (n - self.nvars)
        return Poly.linear(cs)

    def padded(self, nvars: int) -> "LinearForm":
        if nvars < self.nvars:
            raise ValueError("cannot shrink a linear form")
        return LinearForm(list(self.coeffs) + [0] * (nvars - self.nvars))


def complete_frame(alpha: Sequence) -> list[tuple]:
    """Orthogonal rational basis starting with ``alpha``.

    Standard basis vectors are projected off the vectors chosen so far, in
    index order, and kept when the remainder is nonzero.
    """
    alpha = tuple(qq(a) for a in alpha)
    n = len(alpha)
    frame = [alpha]
    norms = [dot(alpha, alpha)]
    for j in range(n):
        if len(frame) == n:
            break
        v = [ONE if i == j else ZERO for i in range(n)]
        for f, nf in zip(frame, norms):
            c = dot(v, f)
            if c != 0:
                s = c / nf
                v = [vi - s * fi for vi, fi in zip(v, f)]
        if any(vi != 0 for vi in v):
            t = tuple(v)
            frame.append(t)
            norms.append(dot(t, t))
    return frame


def frame_substitution(frame: Sequence[Sequence]) -> list[list]:
    """Rows of the matrix expressing ``x`` in frame coordinates ``y``."""
    n = len(frame)
    norms = [dot(f, f) for f in frame]
    return [[frame[j][i] / norms[j] for j in range(n)] for i in range(n)]


@dataclass
class LaurentSlice:
    form: LinearForm
    min_order: int
    coeffs: dict = field(default_factory=dict)
    frame: list = field(default_factory=list)
    k_max: int = 0

    @property
    def normsq(self):
        return self.form.normsq()

    def pole_order(self) -> int:
        return max(0, -self.min_order) if self.coeffs else 0

    def coefficient(self, k: int) -> RatFunc:
        if k > self.k_max:
            raise KeyError(f"order {k} lies beyond the retained range (k_max={self.k_max})")
        c = self.coeffs.get(k)
        if c is None:
            return RatFunc.zero(len(self.frame) - 1)
        return c

    def complement_rows(self) -> list[tuple]:
        """Rows expressing the complementary coordinates as forms in ``x``."""
        return [tuple(f) for f in self.frame[1:]]

    def resum(self) -> RatFunc:
        """Sum of the retained terms as a rational function of ``x``."""
        n = len(self.frame)
        ell = RatFunc.from_poly(self.form.to_poly(n))
        rows = self.complement_rows()
        parts = []
        for k in sorted(self.coeffs):
            c = self.coeffs[k]
            cx = c.compose_linear(rows, n) if n > 1 else RatFunc.const(n, c.constant_value())
            parts.append(cx * ell**k)
        return RatFunc.sum(parts, nvars=n)


def _series_inverse_linear(a: RatFunc, b: RatFunc, e: int, K: int) -> list[RatFunc]:
    """Coefficients of ``(a + b t)^(-e)`` up to ``t^(K-1)``."""
    inv_a = a.inverse()
    ratio = b * inv_a
    base = inv_a**e
    out = []
    term = base
    for k in range(K):
        if k:
            term = term * ratio
        out.append(term * ((-1) ** k * comb(e + k - 1, k)))
    return out


def _series_mul(p: list[RatFunc], q: list[RatFunc], K: int, nvars: int) -> list[RatFunc]:
    out = []
    for k in range(K):
        terms = [p[i] * q[k - i] for i in range(k + 1) if i < len(p) and k - i < len(q)]
        out.append(RatFunc.sum(terms, nvars=nvars))
    return out


def _series_inverse(g: list[RatFunc], K: int, nvars: int) -> list[RatFunc]:
    g0_inv = g[0].inverse()
    h = [g0_inv]
    for j in range(1, K):
        acc = RatFunc.sum([g[i] * h[j - i] for i in range(1, j + 1) if i < len(g)], nvars=nvars)
        h.append(-(acc * g0_inv))
    return h


def _poly_in_t(p: Poly, K: int) -> list[RatFunc]:
    """Split a polynomial in ``(t, y')`` into coefficients of ``t^k``, ``k < K``."""
    parts = p.coeffs_in(0, drop=True)
    m = p.nvars - 1
    return [RatFunc.from_poly(parts[k]) if k in parts else RatFunc.zero(m) for k in range(K)]


def laurent_along(f: RatFunc, form: LinearForm | Sequence, k_max: int | None = None) -> LaurentSlice:
    """Laurent coefficients of ``f`` in powers of the linear form.

    With ``k_max`` omitted the expansion runs four orders beyond the pole.
    """
    if not isinstance(form, LinearForm):
        form = LinearForm(form)
    n = f.nvars
    if form.nvars < n:
        form = form.padded(n)
    elif form.nvars > n:
        raise ValueError("linear form has more coefficients than the function has variables")
    frame = complete_frame(form.coeffs)
    sub = frame_substitution(frame)
    m = n - 1

    pole = 0
    factors: list[tuple[Poly, int]] = []
    for lf, e in f.lin.items():
        g = lf.compose_linear(sub, n)
        if g.variables() == {0}:
            pole += e
        factors.append((g, e))
    hp = None
    if not f.h.is_one():
        hp = f.h.compose_linear(sub, n)
        low = min(e[0] for e in hp.terms)
        if low:
            # the remainder may still carry powers of the form itself
            pole += low
            hp = Poly._raw(n, {(e[0] - low,) + e[1:]: c for e, c in hp.terms.items()})
    if k_max is None:
        k_max = -pole + 4
    if f.is_zero():
        return LaurentSlice(form, k_max + 1, {}, frame, k_max)

    K = k_max + pole + 1
    if K <= 0:
        return LaurentSlice(form, -pole, {}, frame, k_max)

    num = f.num.compose_linear(sub, n, below=K)
    series = _poly_in_t(num, K)
    scale = ONE
    for g, e in factors:
        if g.variables() == {0}:
            # g = c * t: the power of t is the pole, c^e folds into the scale
            scale *= g.lc() ** e
            continue
        parts = g.coeffs_in(0, drop=True)
        a = RatFunc.from_poly(parts.get(0, Poly.zero(m)))
        b = RatFunc.from_poly(parts.get(1, Poly.zero(m)))
        if a.is_zero():
            raise LaurentError("denominator vanishes identically on the hyperplane")
        series = _series_mul(series, _series_inverse_linear(a, b, e, K), K, m)
    if hp is not None:
        hs = _poly_in_t(hp, K)
        if hs[0].is_zero():
            raise LaurentError("denominator vanishes identically on the hyperplane")
        series = _series_mul(series, _series_inverse(hs, K, m), K, m)
    if scale != 1:
        inv = ONE / scale
        series = [c * inv for c in series]

    coeffs = {}
    for j, c in enumerate(series):
        if not c.is_zero():
            coeffs[j - pole] = c
    min_order = min(coeffs) if coeffs else k_max + 1
    return LaurentSlice(form, min_order, coeffs, frame, k_max)


def substitute_linear(f: RatFunc, A: Sequence[Sequence]) -> RatFunc:
    """``f(A y)`` as a rational function of ``y``."""
    from .linalg import as_matrix, determinant

    M = as_matrix(A)
    if len(M) != f.nvars or any(len(r) != f.nvars for r in M):
        raise ValueError("substitution matrix must be square of size nvars")
    if determinant(M) == 0:
        raise ValueError("substitution matrix is singular")
    return f.compose_linear(M, f.nvars)
