"""Small exact linear algebra over the rationals.

Matrices are tuples of row tuples holding ``QQ`` entries.  Sizes here are at
most a few dozen rows, so plain Gaussian elimination is enough.
"""

from __future__ import annotations

from typing import Sequence

from ._backend import ONE, ZERO, qq

Matrix = tuple[tuple, ...]


class SingularMatrixError(ValueError):
    pass


def as_matrix(rows: Sequence[Sequence]) -> Matrix:
    out = tuple(tuple(qq(v) for v in row) for row in rows)
    if out and len({len(r) for r in out}) != 1:
        raise ValueError("ragged matrix")
    return out


def identity(n: int) -> Matrix:
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else ()


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), ZERO) for col in bt) for row in a)


def matvec(a: Matrix, v: Sequence) -> tuple:
    return tuple(sum((x * y for x, y in zip(row, v)), ZERO) for row in a)


def dot(u: Sequence, v: Sequence):
    return sum((x * y for x, y in zip(u, v)), ZERO)


def rref(a: Sequence[Sequence]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form and the pivot columns."""
    m = [list(r) for r in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = ONE / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [vi - f * vr for vi, vr in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a: Sequence[Sequence]) -> int:
    if not a:
        return 0
    return len(rref(a)[1])


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("inverse needs a square matrix")
    aug = [list(r) + list(e) for r, e in zip(a, identity(n))]
    m, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise SingularMatrixError("matrix is singular")
    return tuple(tuple(row[n:]) for row in m)


def determinant(a: Matrix):
    n = len(a)
    m = [list(r) for r in a]
    det = ONE
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return ZERO
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [vi - f * vc for vi, vc in zip(m[i], m[c])]
    return det


def solve(a: Sequence[Sequence], b: Sequence) -> list | None:
    """One solution of ``a x = b`` (free variables set to zero), or None."""
    cols = len(a[0])
    aug = [list(r) + [bv] for r, bv in zip(a, b)]
    m, piv = rref(aug)
    if cols in piv:
        return None
    x = [ZERO] * cols
    for row, c in zip(m, piv):
        x[c] = row[cols]
    return x


_PRIMES = ((1 << 61) - 1, (1 << 61) - 31, (1 << 61) - 45, (1 << 61) - 99)


def _solve_mod(a: Sequence[Sequence], b: Sequence, p: int) -> list[int] | None:
    cols = len(a[0])
    m = []
    for row, bv in zip(a, b):
        r = []
        for v in list(row) + [bv]:
            d = int(v.denominator) % p
            if d == 0:
                raise ZeroDivisionError
            r.append(int(v.numerator) * pow(d, -1, p) % p)
        m.append(r)
    pivots = []
    rr = 0
    for c in range(cols):
        piv = next((i for i in range(rr, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[rr], m[piv] = m[piv], m[rr]
        inv = pow(m[rr][c], -1, p)
        m[rr] = [v * inv % p for v in m[rr]]
        top = m[rr]
        for i in range(len(m)):
            if i != rr and m[i][c]:
                f = m[i][c]
                m[i] = [(vi - f * vr) % p for vi, vr in zip(m[i], top)]
        pivots.append(c)
        rr += 1
        if rr == len(m):
            break
    if any(m[i][cols] for i in range(rr, len(m))):
        return None
    x = [0] * cols
    for i, c in enumerate(pivots):
        x[c] = m[i][cols]
    return x


def _rational_reconstruct(a: int, m: int):
    """Smallest ``p/q`` congruent to ``a`` mod ``m``, or None."""
    from math import isqrt

    bound = isqrt(m // 2)
    r0, r1 = m, a % m
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    return qq(r1) / qq(s1)


def solve_modular(a: Sequence[Sequence], b: Sequence) -> list | None:
    """Candidate solution of ``a x = b`` via elimination modulo primes.

    Residues from successive primes are combined by CRT until rational
    reconstruction stabilizes.  The result is a candidate only: callers must
    verify it exactly.  None means no stable candidate was found.
    """
    residues, modulus = None, 1
    previous = None
    for p in _PRIMES:
        try:
            x = _solve_mod(a, b, p)
        except ZeroDivisionError:
            continue
        if x is None:
            return None
        if residues is None:
            residues, modulus = x, p
        else:
            inv = pow(modulus, -1, p)
            residues = [r + modulus * ((xi - r) * inv % p) for r, xi in zip(residues, x)]
            modulus *= p
        cand = [_rational_reconstruct(r, modulus) for r in residues]
        if any(c is None for c in cand):
            continue
        if cand == previous:
            return cand
        previous = cand
    return previous


def is_orthogonal(a: Matrix) -> bool:
    n = len(a)
    return matmul(transpose(a), a) == identity(n)
