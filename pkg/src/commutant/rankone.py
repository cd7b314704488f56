"""Rank-one reduction along a single root and the one-variable obstruction.

Near a hyperplane ``<alpha, x> = 0`` a commutant ``P`` of ``L`` reduces to a
one-variable problem in ``t = <alpha, x>``.  Everything here works in the
scaled frame of :mod:`commutant.laurent`, so the effective coupling is
``cbar = C_alpha / <alpha, alpha>`` and all arithmetic stays rational.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import isqrt
from typing import Sequence

from ._backend import ONE, ZERO, qq
from .diffop import DiffOp, commutator, compose, constant_principal_symbol, symbol_parts
from .laurent import LinearForm, complete_frame, laurent_along
from .poly import Poly
from .ratfunc import RatFunc
from .reflection import Arrangement, RootVector, is_invariant, reflection_matrix


# ---------------------------------------------------------------------------
# genericity and the one-variable recursion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Genericity:
    generic: bool
    k: int | None = None

    def __str__(self):
        return "generic" if self.generic else f"nongeneric({self.k})"


def is_generic(C, normsq) -> Genericity:
    """Decide whether ``C / normsq`` avoids every value ``k(k+1)``."""
    C, normsq = qq(C), qq(normsq)
    if normsq <= 0:
        raise ValueError("normsq must be positive")
    d = 1 + 4 * (C / normsq)
    if d < 0 or d.denominator != 1:
        return Genericity(True)
    num = int(d.numerator)
    r = isqrt(num)
    # an even root means cbar = (r^2 - 1)/4 is not an integer, e.g. cbar = 3/4
    if r * r != num or r % 2 == 0:
        return Genericity(True)
    return Genericity(False, (r - 1) // 2)


@dataclass
class BCTable:
    cbar: object
    m: int
    c: list  # c[j][i] for 0 <= i <= j <= m + 1

    def entry(self, j: int, i: int):
        return self.c[j][i]

    def p(self, j: int) -> RatFunc:
        """``p_j(t) = sum_i c_{j,i} t^(-2i)``."""
        t = Poly.var(1, 0)
        parts = [RatFunc.pole(t, 2 * i, v) for i, v in enumerate(self.c[j]) if v != 0]
        return RatFunc.sum(parts, nvars=1)


def bc_recursion(cbar, m: int, free: Sequence | None = None) -> BCTable:
    """Fill ``c_{j+1,i+1} = (2i+1)/(2i+2) (cbar - i(i+1)) c_{j,i}`` from ``c_{0,0} = 1``."""
    cbar = qq(cbar)
    if m < 0:
        raise ValueError("m must be non-negative")
    free = [ZERO] * (m + 1) if free is None else [qq(v) for v in free]
    if len(free) != m + 1:
        raise ValueError(f"expected {m + 1} free constants c_(j,0), got {len(free)}")
    c = [[ONE]]
    for j in range(m + 1):
        row = [free[j]]
        for i in range(j + 1):
            row.append(qq(2 * i + 1) / (2 * i + 2) * (cbar - i * (i + 1)) * c[j][i])
        c.append(row)
    return BCTable(cbar, m, c)


def obstruction(cbar, m: int):
    """``prod_{k=0}^{m} (2k+1)/(2k+2) (cbar - k(k+1))``."""
    if m < 0:
        raise ValueError("m must be non-negative")
    cbar = qq(cbar)
    out = ONE
    for k in range(m + 1):
        out *= qq(2 * k + 1) / (2 * k + 2) * (cbar - k * (k + 1))
    return out


def schrodinger_1d(cbar) -> DiffOp:
    """``-d^2/dt^2 + cbar / t^2``."""
    t = Poly.var(1, 0)
    return DiffOp.partial(1, 0, 2) * -1 + DiffOp.multiplication(RatFunc.pole(t, 2, cbar), 1)


def build_Am(k: int) -> DiffOp:
    """Odd-order operator commuting with ``-d^2/dt^2 + k(k+1)/t^2``.

    Built as ``sum_j (p_j d/dt - p_j'/2) L1^(k-j)`` with all free constants
    of the recursion set to zero, so that ``p_j = c_{j,j} t^(-2j)``.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    cbar = k * (k + 1)
    table = bc_recursion(cbar, k)
    L1 = schrodinger_1d(cbar)
    powers = [DiffOp.identity(1)]
    for _ in range(k):
        powers.append(compose(powers[-1], L1))
    out = []
    for j in range(k + 1):
        pj = table.p(j)
        first = DiffOp.monomial((1,), pj) - DiffOp.multiplication(pj.diff(0) * qq("1/2"), 1)
        out.append(compose(first, powers[k - j]))
    return DiffOp.sum(out, 1)


# ---------------------------------------------------------------------------
# reduction of a multivariate commutant
# ---------------------------------------------------------------------------

class PoleOrderError(ValueError):
    """A symbol has a pole of order larger than its grade along a root."""

    def __init__(self, k: int, order: int):
        super().__init__(
            f"grade {k} symbol has a pole of order {order} > {k}: commutation already impossible"
        )
        self.k = k
        self.order = order


@dataclass
class ReductionResult:
    alpha: RootVector
    cbar: object
    qtables: list  # per grade: {eta multi-index: RatFunc in complementary coordinates}
    pole_orders: list
    holds: bool
    failure: tuple | None = None  # (k, eta multi-index, coefficient)
    one_variable_zero: bool = True
    frame: list = field(default_factory=list)

    def q_eta1_odd_part(self, k: int = 0) -> dict:
        return {e: c for e, c in self.qtables[k].items() if e[0] % 2 == 1}


def _xi_in_eta(frame: Sequence[Sequence], n: int) -> list[Poly]:
    """``xi_j = sum_i (f_i)_j eta_i`` for the differential variables."""
    return [Poly.linear([frame[i][j] for i in range(n)]) for j in range(n)]


def coupling_along(L: DiffOp, alpha: Sequence) -> RatFunc:
    """Coefficient of ``<alpha,x>^(-2)`` in the potential of ``L``."""
    n, total = L.nvars, L.ring_vars
    R = L.coeff((0,) * n)
    form = LinearForm(list(alpha) + [0] * (total - n))
    sl = laurent_along(R, form, -2)
    if sl.min_order < -2:
        raise ValueError("potential has a pole of order above two along the root")
    return sl.coefficient(-2)


def rank_one_reduce(P: DiffOp, L: DiffOp, alpha: RootVector | Sequence) -> ReductionResult:
    """Reduce ``[L, P] = 0`` to its one-variable form along ``alpha``."""
    if not isinstance(alpha, RootVector):
        alpha = RootVector(alpha)
    P._check(L)
    n, total = P.nvars, P.ring_vars
    if alpha.dim != n:
        raise ValueError("root dimension does not match the operator")
    cpl = coupling_along(L, alpha.coords)
    cbar = cpl * (ONE / alpha.squared_norm)
    form = LinearForm(list(alpha.coords) + [0] * (total - n))
    frame = complete_frame(form.coeffs)
    xi = _xi_in_eta(frame, n)
    m0 = P.order()
    parts = symbol_parts(P)
    m_ring = total - 1

    qtables, pole_orders = [], []
    for k, part in enumerate(parts):
        # expand every coefficient down to order -k, keeping all deeper poles
        acc: dict[int, dict[tuple, list]] = {}
        for p, a in part.items():
            sl = laurent_along(a, form, -k)
            mono = Poly.one(n)
            for j, e in enumerate(p):
                if e:
                    mono = mono * xi[j] ** e
            for s, c in sl.coeffs.items():
                bucket = acc.setdefault(s, {})
                for eta, v in mono.terms.items():
                    bucket.setdefault(eta, []).append(c * v)
        combined = {}
        for s, bucket in acc.items():
            vals = {}
            for eta, items in bucket.items():
                v = RatFunc.sum(items, nvars=m_ring)
                if not v.is_zero():
                    vals[eta] = v
            if vals:
                combined[s] = vals
        order = max([-s for s in combined] + [0])
        pole_orders.append(order)
        if order > k:
            raise PoleOrderError(k, order)
        qtables.append(combined.get(-k, {}))

    failure = _check_rank_one_equation(qtables, cbar, m0, m_ring)
    one_var = _one_variable_operator(qtables, n, m_ring)
    L1 = schrodinger_1d_param(cbar, one_var.nparams)
    zero = commutator(L1, one_var).is_zero()
    return ReductionResult(alpha, cbar, qtables, pole_orders, failure is None, failure, zero, frame)


def _check_rank_one_equation(qtables: list, cbar: RatFunc, m0: int, m_ring: int):
    """First ``(j, eta)`` where the recursion relation between the ``Q_k`` fails.

    The relation at order ``j`` reads
    ``-2(j+1) eta_1 Q_{j+1} + j(j+1) Q_j + sum_{l=1}^{j} (-1)^l (l+1) cbar d^l Q_{j-l} = 0``
    with ``d`` the derivative in ``eta_1``.
    """
    def Q(k):
        return qtables[k] if 0 <= k < len(qtables) else {}

    def d_eta1(q: dict, l: int) -> dict:
        out = {}
        for e, c in q.items():
            if e[0] >= l:
                f = 1
                for r in range(l):
                    f *= e[0] - r
                out[(e[0] - l,) + e[1:]] = c * f
        return out

    for j in range(2 * m0 + 2):
        acc: dict[tuple, list] = {}
        for e, c in Q(j + 1).items():
            acc.setdefault((e[0] + 1,) + e[1:], []).append(c * (-2 * (j + 1)))
        if j:
            for e, c in Q(j).items():
                acc.setdefault(e, []).append(c * (j * (j + 1)))
        for l in range(1, j + 1):
            sign = -1 if l % 2 else 1
            for e, c in d_eta1(Q(j - l), l).items():
                acc.setdefault(e, []).append(c * cbar * (sign * (l + 1)))
        for e in sorted(acc):
            v = RatFunc.sum(acc[e], nvars=m_ring)
            if not v.is_zero():
                return (j, e, v)
    return None


def _one_variable_operator(qtables: list, n: int, m_ring: int) -> DiffOp:
    """``sum_k t^(-k) Q_k(y', d/dt, eta')`` with ``y'`` and ``eta'`` as parameters."""
    nparams = m_ring + (n - 1)
    total = 1 + nparams
    t = Poly.var(total, 0)
    coeff_map = list(range(1, 1 + m_ring))
    terms: dict[tuple, list] = {}
    for k, q in enumerate(qtables):
        for e, c in q.items():
            c_emb = c.embed(total, coeff_map)
            eta_mono = {}
            exps = [0] * total
            for i, v in enumerate(e[1:]):
                exps[1 + m_ring + i] = v
            eta_mono[tuple(exps)] = ONE
            factor = RatFunc.from_poly(Poly(total, eta_mono)) * RatFunc.pole(t, k)
            terms.setdefault((e[0],), []).append(c_emb * factor)
    acc = {p: RatFunc.sum(v, nvars=total) for p, v in terms.items()}
    return DiffOp(1, acc, nparams)


def schrodinger_1d_param(cbar: RatFunc, nparams: int) -> DiffOp:
    """``-d^2/dt^2 + cbar/t^2`` over a ring with ``nparams`` parameters.

    ``cbar`` is a function of the complementary coordinates and the original
    parameters; those occupy the first parameter slots.
    """
    total = 1 + nparams
    c = cbar.embed(total, list(range(1, 1 + cbar.nvars)))
    t = Poly.var(total, 0)
    pot = c * RatFunc.pole(t, 2)
    return DiffOp.partial(1, 0, 2, nparams) * -1 + DiffOp.multiplication(pot, 1, nparams)


# ---------------------------------------------------------------------------
# invariance of the principal symbol
# ---------------------------------------------------------------------------

@dataclass
class GateEntry:
    alpha: tuple
    genericity: str
    invariant: bool
    violation: bool


@dataclass
class GateReport:
    entries: list

    @property
    def passed(self) -> bool:
        return not any(e.violation for e in self.entries)

    @property
    def violations(self) -> list:
        return [e for e in self.entries if e.violation]


def invariance_gate(P: DiffOp, arr: Arrangement) -> GateReport:
    """Check reflection invariance of the constant principal symbol per root.

    A non-invariant symbol at a root with generic coupling certifies that
    ``P`` cannot commute with the corresponding operator.
    """
    sym = constant_principal_symbol(P)
    entries = []
    for r, c in zip(arr.roots, arr.couplings):
        if c is None or isinstance(c, str):
            verdict = Genericity(True)  # an indeterminate coupling is generic
        else:
            verdict = is_generic(c, r.squared_norm)
        inv = is_invariant(sym, reflection_matrix(r))
        entries.append(GateEntry(r.coords, str(verdict), inv, verdict.generic and not inv))
    return GateReport(entries)
