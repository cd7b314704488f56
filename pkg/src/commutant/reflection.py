"""Roots, reflections and the finite groups they generate."""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from ._backend import ZERO, qq
from .linalg import Matrix, dot, identity, matmul, rank, transpose
from .poly import Poly

DEFAULT_CAP = 10_000


@dataclass(frozen=True)
class RootVector:
    coords: tuple
    squared_norm: object

    def __init__(self, coords: Sequence):
        cs = tuple(qq(c) for c in coords)
        if not cs or all(c == 0 for c in cs):
            raise ValueError("root vector must be nonzero")
        object.__setattr__(self, "coords", cs)
        object.__setattr__(self, "squared_norm", dot(cs, cs))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def is_parallel(self, other: "RootVector") -> bool:
        if self.dim != other.dim:
            return False
        # parallel iff all 2x2 minors vanish
        a, b = self.coords, other.coords
        i = next(k for k, v in enumerate(a) if v != 0)
        return all(a[i] * b[j] == a[j] * b[i] for j in range(len(a)))

    def __neg__(self):
        return RootVector([-c for c in self.coords])


def _is_numeric(c) -> bool:
    if isinstance(c, str):
        try:
            qq(c)
            return True
        except (ValueError, ZeroDivisionError):
            return False
    return True


class Arrangement:
    """Pairwise non-parallel roots with one coupling constant per root.

    A coupling is either an exact rational or a string naming a symbolic
    parameter.  ``None`` marks a root whose coupling is unknown (used as
    classification input).
    """

    def __init__(self, nvars: int, roots: Sequence, couplings: Sequence | None = None):
        self.nvars = nvars
        rs = [r if isinstance(r, RootVector) else RootVector(r) for r in roots]
        for r in rs:
            if r.dim != nvars:
                raise ValueError("root dimension does not match nvars")
        for i in range(len(rs)):
            for j in range(i):
                if rs[i].is_parallel(rs[j]):
                    raise ValueError(f"roots {j} and {i} are parallel")
        if couplings is None:
            couplings = [1] * len(rs)
        if len(couplings) != len(rs):
            raise ValueError("one coupling per root is required")
        cs = []
        for c in couplings:
            if c is None:
                cs.append(None)
            elif _is_numeric(c):
                v = qq(c)
                if v == 0:
                    raise ValueError("couplings must be nonzero")
                cs.append(v)
            else:
                cs.append(str(c).strip())
        self.roots = rs
        self.couplings = cs

    def __len__(self):
        return len(self.roots)

    def with_couplings(self, couplings: Sequence) -> "Arrangement":
        return Arrangement(self.nvars, self.roots, couplings)

    def coupling_of(self, alpha: Sequence):
        target = RootVector(alpha)
        for r, c in zip(self.roots, self.couplings):
            if r.is_parallel(target):
                return r, c
        raise KeyError("root not in arrangement")

    def __repr__(self):
        return f"Arrangement(nvars={self.nvars}, roots={[r.coords for r in self.roots]})"


def reflection_matrix(alpha: RootVector | Sequence) -> Matrix:
    """``I - (2/<a,a>) a a^T``."""
    if not isinstance(alpha, RootVector):
        alpha = RootVector(alpha)
    a, n2 = alpha.coords, alpha.squared_norm
    n = len(a)
    return tuple(
        tuple((1 if i == j else 0) - 2 * a[i] * a[j] / n2 for j in range(n)) for i in range(n)
    )


@dataclass
class GroupClosure:
    elements: frozenset
    generators: list = field(default_factory=list)
    capped: bool = False

    @property
    def order(self) -> int:
        return len(self.elements)


def generate_group(arr: Arrangement | Sequence[Matrix], cap: int = DEFAULT_CAP) -> GroupClosure:
    """Breadth-first closure of the reflections; stops once ``cap`` is exceeded."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    if isinstance(arr, Arrangement):
        gens = [reflection_matrix(r) for r in arr.roots]
        n = arr.nvars
    else:
        gens = [tuple(tuple(qq(v) for v in row) for row in g) for g in arr]
        n = len(gens[0]) if gens else 0
    e = identity(n)
    seen = {e}
    queue = deque([e])
    capped = False
    while queue:
        g = queue.popleft()
        for s in gens:
            h = matmul(s, g)
            if h not in seen:
                seen.add(h)
                if len(seen) > cap:
                    capped = True
                    break
                queue.append(h)
        if capped:
            break
    return GroupClosure(frozenset(seen), gens, capped)


def positive_system(kind: str, n: int) -> Arrangement:
    """Positive roots of type A (``e_i - e_j``), B or D in ``R^n`` with unit couplings."""
    kind = kind.upper()
    if kind not in {"A", "B", "D"}:
        raise ValueError(f"unknown root system type {kind!r}")
    if n < 2:
        raise ValueError("n must be at least 2")
    if kind == "D":
        if n < 3:
            raise ValueError("type D needs n >= 3")
        if n == 3:
            warnings.warn("D3 coincides with A3 up to a change of coordinates", stacklevel=2)

    def unit(i):
        v = [0] * n
        v[i] = 1
        return v

    roots = []
    for i in range(n):
        for j in range(i + 1, n):
            v = unit(i)
            v[j] = -1
            roots.append(v)
            if kind in {"B", "D"}:
                w = unit(i)
                w[j] = 1
                roots.append(w)
    if kind == "B":
        roots.extend(unit(i) for i in range(n))
    return Arrangement(n, roots)


def is_irreducible(arr: Arrangement) -> str:
    """``yes``, ``fails_I1`` (roots do not span) or ``fails_I2`` (orthogonal split)."""
    if not arr.roots:
        return "fails_I1"
    if rank([r.coords for r in arr.roots]) < arr.nvars:
        return "fails_I1"
    if not _connected(arr.roots):
        return "fails_I2"
    return "yes"


def _connected(roots: Sequence[RootVector]) -> bool:
    k = len(roots)
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in range(k):
            if j not in seen and dot(roots[i].coords, roots[j].coords) != 0:
                seen.add(j)
                stack.append(j)
    return len(seen) == k


def act_on_symbol(f: Poly, w: Matrix) -> Poly:
    """``f(w^T xi)``."""
    wt = transpose(w)
    return f.compose_linear(wt, f.nvars)


def is_invariant(f, G) -> bool:
    """Whether a polynomial in ``xi`` is fixed by every element (or one matrix)."""
    from .diffop import SymbolPoly

    if isinstance(f, SymbolPoly):
        f = f.xi_poly()
    if isinstance(G, GroupClosure):
        if G.capped:
            raise ValueError("group closure hit the cap; invariance cannot be certified")
        mats = G.generators or list(G.elements)
    else:
        mats = [G]
    return all(act_on_symbol(f, w) == f for w in mats)


def permutes_root_lines(G: GroupClosure, arr: Arrangement) -> bool:
    """Every element maps each root to plus or minus a root of ``arr``."""
    lines = set()
    for r in arr.roots:
        lines.add(r.coords)
        lines.add(tuple(-c for c in r.coords))
    for w in G.elements:
        for r in arr.roots:
            img = tuple(sum((w[i][j] * r.coords[j] for j in range(arr.nvars)), ZERO) for i in range(arr.nvars))
            if img not in lines:
                return False
    return True
