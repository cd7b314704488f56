"""Sparse multivariate polynomials with exact rational coefficients.

A :class:`Poly` maps exponent tuples to ``QQ`` coefficients.  Values are
treated as immutable once built.  The monomial order used for leading terms is
graded lexicographic with ``x1 < x2 < ... < xn``: compare total degree first,
then the exponent of ``xn``, then ``x(n-1)`` and so on.
"""

from __future__ import annotations

import heapq
from math import gcd as _igcd, isqrt as _isqrt
from operator import add
from typing import Iterable, Mapping, Sequence

from ._backend import ONE, ZERO, QQ, denom, numer, qq

Monomial = tuple

# Fixed modulus for fast vanishing pre-tests; exact arithmetic always confirms.
_P = (1 << 61) - 1


class NotDivisibleError(ArithmeticError):
    pass


def grlex_key(e: Monomial) -> tuple:
    return (sum(e), e[::-1])


def _neg_key(e: Monomial) -> tuple:
    return (-sum(e), tuple(-x for x in reversed(e)))


class Poly:
    __slots__ = ("nvars", "terms", "_hash", "_lm")

    def __init__(self, nvars: int, terms: Mapping[Monomial, object] | None = None):
        self.nvars = nvars
        clean = {}
        if terms:
            for e, c in terms.items():
                c = qq(c)
                if c != 0:
                    e = tuple(e)
                    if len(e) != nvars or any(x < 0 for x in e):
                        raise ValueError(f"bad exponent {e} for {nvars} variables")
                    clean[e] = clean.get(e, ZERO) + c
            clean = {e: c for e, c in clean.items() if c != 0}
        self.terms = clean
        self._hash = None
        self._lm = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> "Poly":
        p = object.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p._hash = None
        p._lm = None
        return p

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls._raw(nvars, {})

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        c = qq(c)
        return cls._raw(nvars, {(0,) * nvars: c} if c != 0 else {})

    @classmethod
    def one(cls, nvars: int) -> "Poly":
        return cls._raw(nvars, {(0,) * nvars: ONE})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls._raw(nvars, {tuple(e): ONE})

    @classmethod
    def linear(cls, coeffs: Sequence, constant=0) -> "Poly":
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            c = qq(c)
            if c != 0:
                e = [0] * n
                e[i] = 1
                terms[tuple(e)] = c
        constant = qq(constant)
        if constant != 0:
            terms[(0,) * n] = constant
        return cls._raw(n, terms)

    # -- basic predicates ---------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and (0,) * self.nvars in self.terms)

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self.terms.get((0,) * self.nvars, ZERO)

    def is_one(self) -> bool:
        return len(self.terms) == 1 and self.terms.get((0,) * self.nvars) == 1

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=-1)

    def variables(self) -> set[int]:
        out = set()
        for e in self.terms:
            out.update(i for i, x in enumerate(e) if x)
        return out

    def leading_monomial(self) -> Monomial:
        if self._lm is None:
            if not self.terms:
                raise ValueError("zero polynomial has no leading term")
            self._lm = max(self.terms, key=grlex_key)
        return self._lm

    def lc(self):
        return self.terms[self.leading_monomial()]

    def monic(self) -> "Poly":
        if not self.terms:
            return self
        c = self.lc()
        if c == 1:
            return self
        inv = ONE / c
        return Poly._raw(self.nvars, {e: v * inv for e, v in self.terms.items()})

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other: "Poly"):
        if other.nvars != self.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly.const(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        if len(other.terms) > len(self.terms):
            a, b = other, self
        else:
            a, b = self, other
        out = dict(a.terms)
        for e, c in b.terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v = v + c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return Poly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Poly":
        c = qq(c)
        if c == 0:
            return Poly.zero(self.nvars)
        if c == 1:
            return self
        return Poly._raw(self.nvars, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        self._check(other)
        if not self.terms or not other.terms:
            return Poly.zero(self.nvars)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            (eb, cb), = b.items()
            if not any(eb):
                return self.scale(cb) if b is other.terms else other.scale(cb)
            return Poly._raw(self.nvars, {tuple(map(add, ea, eb)): ca * cb for ea, ca in a.items()})
        # pack exponent vectors into integers so the inner loop adds ints
        n = self.nvars
        top = max(max(e) for e in a) + max(max(e) for e in b)
        w = top.bit_length() + 1
        mask = (1 << w) - 1
        shifts = [w * i for i in range(n)]

        def pack(e):
            k = 0
            for s, x in zip(shifts, e):
                k |= x << s
            return k

        bl = [(pack(eb), cb) for eb, cb in b.items()]
        out: dict = {}
        get = out.get
        for ea, ca in a.items():
            ka = pack(ea)
            for kb, cb in bl:
                k = ka + kb
                v = get(k)
                out[k] = ca * cb if v is None else v + ca * cb
        return Poly._raw(
            n, {tuple((k >> s) & mask for s in shifts): c for k, c in out.items() if c}
        )

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.one(self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def diff(self, i: int, times: int = 1) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k >= times:
                f = 1
                for j in range(times):
                    f *= k - j
                ne = list(e)
                ne[i] = k - times
                out[tuple(ne)] = c * f
        return Poly._raw(self.nvars, out)

    # -- comparison ---------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if not self.is_constant():
            return False
        try:
            return self.constant_value() == qq(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # -- evaluation and substitution ---------------------------------------
    def evaluate(self, point: Sequence):
        point = [qq(v) for v in point]
        total = ZERO
        for e, c in self.terms.items():
            t = c
            for x, k in zip(point, e):
                if k:
                    t *= x**k
            total += t
        return total

    def eval_mod(self, point: Sequence[int], p: int = _P) -> int | None:
        """Value modulo ``p`` at an integer point; None if a denominator vanishes mod p."""
        maxdeg = [0] * self.nvars
        for e in self.terms:
            for i, k in enumerate(e):
                if k > maxdeg[i]:
                    maxdeg[i] = k
        tables = []
        for x, m in zip(point, maxdeg):
            row = [1] * (m + 1)
            for k in range(1, m + 1):
                row[k] = row[k - 1] * x % p
            tables.append(row)
        total = 0
        for e, c in self.terms.items():
            t = c.numerator
            d = c.denominator
            if d != 1:
                d %= p
                if d == 0:
                    return None
                t = t * pow(int(d), -1, p)
            for tab, k in zip(tables, e):
                if k:
                    t = t * tab[k] % p
            total += t
        return int(total % p)

    def partial_eval(self, values: Mapping[int, object]) -> "Poly":
        """Substitute constants for some variables (variable count unchanged)."""
        vals = {i: qq(v) for i, v in values.items()}
        out: dict = {}
        for e, c in self.terms.items():
            ne = list(e)
            for i, v in vals.items():
                if e[i]:
                    c = c * v ** e[i]
                    ne[i] = 0
            if c:
                ne = tuple(ne)
                out[ne] = out.get(ne, ZERO) + c
        return Poly._raw(self.nvars, {e: c for e, c in out.items() if c})

    def compose_linear(
        self, rows: Sequence[Sequence], new_nvars: int | None = None, below: int | None = None
    ) -> "Poly":
        """Replace variable ``i`` with the linear form ``sum_j rows[i][j] * y_j``.

        With ``below`` only terms of degree ``< below`` in ``y_0`` are kept.
        """
        if len(rows) != self.nvars:
            raise ValueError("one linear form per variable is required")
        m = new_nvars if new_nvars is not None else (len(rows[0]) if rows else 0)
        forms = [Poly.linear(r) if len(r) == m else None for r in rows]
        if any(f is None for f in forms):
            raise ValueError("linear form length mismatch")
        cache: dict = {}

        def cut(p):
            if below is None:
                return p
            return Poly._raw(m, {e: c for e, c in p.terms.items() if e[0] < below})

        def power(i, k):
            key = (i, k)
            if key not in cache:
                cache[key] = Poly.one(m) if k == 0 else cut(power(i, k - 1) * forms[i])
            return cache[key]

        # terms sharing an exponent prefix reuse the product of its powers
        prefix: dict = {(): Poly.one(m)}

        def product(e):
            if e in prefix:
                return prefix[e]
            head = e[:-1]
            while head and head[-1] == 0:
                head = head[:-1]
            p = product(head)
            k = e[-1]
            prefix[e] = cut(p * power(len(e) - 1, k)) if k else p
            return prefix[e]

        acc: dict = {}
        for e, c in self.terms.items():
            t = list(e)
            while t and t[-1] == 0:
                t.pop()
            for me, mc in product(tuple(t)).terms.items():
                v = acc.get(me)
                acc[me] = mc * c if v is None else v + mc * c
        return Poly._raw(m, {e: c for e, c in acc.items() if c})

    def embed(self, new_nvars: int, mapping: Sequence[int]) -> "Poly":
        """Move variable ``i`` to position ``mapping[i]`` of a larger ring."""
        out = {}
        for e, c in self.terms.items():
            ne = [0] * new_nvars
            for i, k in enumerate(e):
                if k:
                    ne[mapping[i]] += k
            out[tuple(ne)] = c
        return Poly._raw(new_nvars, out)

    def coeffs_in(self, v: int, drop: bool = False) -> dict[int, "Poly"]:
        """Split as ``sum_k c_k * x_v^k``; with ``drop`` the c_k lose variable v."""
        parts: dict[int, dict] = {}
        nv = self.nvars - 1 if drop else self.nvars
        for e, c in self.terms.items():
            k = e[v]
            if drop:
                ne = e[:v] + e[v + 1:]
            else:
                ne = e[:v] + (0,) + e[v + 1:] if k else e
            parts.setdefault(k, {})[ne] = c
        return {k: Poly._raw(nv, d) for k, d in parts.items()}

    @classmethod
    def from_coeffs_in(cls, v: int, parts: Mapping[int, "Poly"], nvars: int) -> "Poly":
        out: dict = {}
        for k, p in parts.items():
            for e, c in p.terms.items():
                ne = list(e)
                ne[v] += k
                ne = tuple(ne)
                out[ne] = out.get(ne, ZERO) + c
        return cls._raw(nvars, {e: c for e, c in out.items() if c})

    # -- division -----------------------------------------------------------
    def divexact(self, other: "Poly") -> "Poly":
        """Quotient of an exact division; raises NotDivisibleError otherwise."""
        self._check(other)
        if not other.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        if not self.terms:
            return self
        if other.is_constant():
            return self.scale(ONE / other.constant_value())
        lb = other.leading_monomial()
        lcb = other.terms[lb]
        inv = ONE / lcb
        rest = [(e, c) for e, c in other.terms.items() if e != lb]
        r = dict(self.terms)
        heap = [(_neg_key(e), e) for e in r]
        heapq.heapify(heap)
        q = {}
        while heap:
            _, m = heapq.heappop(heap)
            c = r.pop(m, None)
            if c is None:
                continue
            qm = tuple(a - b for a, b in zip(m, lb))
            if any(x < 0 for x in qm):
                raise NotDivisibleError("leading monomial not divisible")
            qc = c * inv
            q[qm] = qc
            for e, cb in rest:
                mm = tuple(map(add, qm, e))
                v = r.get(mm)
                if v is None:
                    r[mm] = -qc * cb
                    heapq.heappush(heap, (_neg_key(mm), mm))
                else:
                    v = v - qc * cb
                    if v:
                        r[mm] = v
                    else:
                        del r[mm]
        return Poly._raw(self.nvars, q)

    def divides(self, other: "Poly") -> bool:
        """True when ``self`` divides ``other``."""
        try:
            other.divexact(self)
            return True
        except NotDivisibleError:
            return False

    # -- integer normalization ---------------------------------------------
    def primitive_integer(self) -> "Poly":
        """Scale to integer coefficients with gcd 1 and positive leading coefficient."""
        if not self.terms:
            return self
        from math import gcd, lcm

        l = 1
        for c in self.terms.values():
            l = lcm(l, denom(c))
        g = 0
        for c in self.terms.values():
            g = gcd(g, numer(c) * (l // denom(c)))
        s = QQ(l, g)
        if self.lc() < 0:
            s = -s
        return self.scale(s)

    # -- printing -----------------------------------------------------------
    def to_str(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = names or [f"x{i + 1}" for i in range(self.nvars)]
        parts = []
        for e in sorted(self.terms, key=grlex_key, reverse=True):
            c = self.terms[e]
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        s = " + ".join(parts)
        return s.replace("+ -", "- ")

    def __repr__(self):
        return f"Poly({self.to_str()})"


# ---------------------------------------------------------------------------
# gcd: content / primitive-part recursion on the last variable
# ---------------------------------------------------------------------------

def _hyperplane_point(f: Poly, v: int, p: int = _P) -> list[int] | None:
    """Integer point mod p on the zero set of a degree-one polynomial f."""
    n = f.nvars
    pt = [(0x9E3779B97F4A7C15 * (i + 3) + 0x632BE59BD9B4E019) % p for i in range(n)]
    a_v = None
    rest = 0
    for e, c in f.terms.items():
        d = denom(c) % p
        if d == 0:
            return None
        cm = numer(c) * pow(d, -1, p) % p
        if sum(e) == 0:
            rest += cm
        elif e[v]:
            a_v = cm
        else:
            rest += cm * pt[e.index(1)]
    if not a_v:
        return None
    pt[v] = (-rest) * pow(a_v, -1, p) % p
    return pt


def linear_divides(f: Poly, g: Poly) -> Poly | None:
    """If the degree-one polynomial f divides g, return g / f; else None."""
    if not g.terms:
        return g
    v = max(f.variables())
    if g.degree(v) < 1:
        # a genuine linear factor in x_v cannot divide a v-free nonzero poly
        return None
    pt = _hyperplane_point(f, v)
    if pt is not None:
        val = g.eval_mod(pt)
        if val is not None and val != 0:
            return None
    try:
        return g.divexact(f)
    except NotDivisibleError:
        return None


def _univariate_content(parts: Iterable[Poly]) -> Poly:
    g = None
    for c in parts:
        g = c.monic() if g is None else gcd(g, c)
        if g.is_one():
            break
    return g


def _prem(a: dict[int, Poly], b: dict[int, Poly]) -> dict[int, Poly]:
    """Pseudo-remainder of univariate representations (degree -> coefficient)."""
    db = max(b)
    lcb = b[db]
    r = {k: c for k, c in a.items() if c}
    while r and max(r) >= db:
        dr = max(r)
        lcr = r[dr]
        shift = dr - db
        new = {}
        for k, c in r.items():
            if k == dr:
                continue
            new[k] = c * lcb
        for k, c in b.items():
            if k == db:
                continue
            kk = k + shift
            t = new.get(kk)
            new[kk] = (-(c * lcr)) if t is None else t - c * lcr
        r = {k: c for k, c in new.items() if c}
    return r


def _pp(parts: dict[int, Poly]) -> dict[int, Poly]:
    cont = _univariate_content(parts.values())
    if not cont.is_one():
        parts = {k: c.divexact(cont) for k, c in parts.items()}
    # keep rational sizes down: shared integer normalization across all parts
    nv = next(iter(parts.values())).nvars
    big: dict = {}
    for k, c in parts.items():
        for e, v in c.terms.items():
            big[(k,) + e] = v
    norm = Poly._raw(nv + 1, big).primitive_integer()
    out: dict[int, dict] = {}
    for e, v in norm.terms.items():
        out.setdefault(e[0], {})[e[1:]] = v
    return {k: Poly._raw(nv, d) for k, d in out.items()}


def gcd(a: Poly, b: Poly) -> Poly:
    """Monic greatest common divisor over Q."""
    a._check(b)
    if not a.terms:
        return b.monic()
    if not b.terms:
        return a.monic()
    if a.is_constant() or b.is_constant():
        return Poly.one(a.nvars)
    if a == b:
        return a.monic()
    if a.total_degree() == 1:
        return a.monic() if linear_divides(a, b) is not None else Poly.one(a.nvars)
    if b.total_degree() == 1:
        return b.monic() if linear_divides(b, a) is not None else Poly.one(a.nvars)
    va, vb = a.variables(), b.variables()
    if not (va & vb):
        return Poly.one(a.nvars)
    h = _heuristic_gcd(a, b)
    if h is not None:
        return h
    return _prs_gcd(a, b)


def _prs_gcd(a: Poly, b: Poly) -> Poly:
    va, vb = a.variables(), b.variables()
    v = max(va | vb)
    if v not in va:
        return gcd(a, _univariate_content(b.coeffs_in(v).values()))
    if v not in vb:
        return gcd(_univariate_content(a.coeffs_in(v).values()), b)
    ua, ub = a.coeffs_in(v), b.coeffs_in(v)
    ca = _univariate_content(ua.values())
    cb = _univariate_content(ub.values())
    c = gcd(ca, cb)
    pa = ua if ca.is_one() else {k: x.divexact(ca) for k, x in ua.items()}
    pb = ub if cb.is_one() else {k: x.divexact(cb) for k, x in ub.items()}
    if max(pa) < max(pb):
        pa, pb = pb, pa
    pa, pb = _pp(pa), _pp(pb)
    while True:
        r = _prem(pa, pb)
        if not r:
            g = pb
            break
        if max(r) == 0:
            g = None
            break
        pa, pb = pb, _pp(r)
    if g is None:
        return c.monic()
    gp = Poly.from_coeffs_in(v, g, a.nvars)
    return (c * gp).monic()


# ---------------------------------------------------------------------------
# heuristic gcd: evaluate at a large integer, recurse, rebuild in base x
# ---------------------------------------------------------------------------

def _to_int_terms(p: Poly) -> dict:
    q = p.primitive_integer()
    return {e: int(c) for e, c in q.terms.items()}


def _int_content(f: dict) -> int:
    g = 0
    for c in f.values():
        g = _igcd(g, c)
        if g == 1:
            break
    return g


def _eval_var(f: dict, v: int, x: int) -> dict:
    out: dict = {}
    for e, c in f.items():
        k = e[v]
        key = e[:v] + (0,) + e[v + 1:] if k else e
        out[key] = out.get(key, 0) + c * x**k
    return {e: c for e, c in out.items() if c}


def _interpolate(h: dict, v: int, x: int) -> dict:
    """Read each integer coefficient as symmetric base-x digits in variable v."""
    out: dict = {}
    half = x // 2
    for e, c in h.items():
        k = 0
        while c:
            d = c % x
            if d > half:
                d -= x
            if d:
                key = e[:v] + (e[v] + k,) + e[v + 1:]
                out[key] = out.get(key, 0) + d
            c = (c - d) // x
            k += 1
    return {e: c for e, c in out.items() if c}


def _int_divides(h: dict, f: dict, nvars: int) -> bool:
    try:
        Poly(nvars, f).divexact(Poly(nvars, h))
        return True
    except NotDivisibleError:
        return False


def _heu(f: dict, g: dict, nvars: int, depth: int = 0) -> dict | None:
    used = set()
    for e in list(f) + list(g):
        used.update(i for i, k in enumerate(e) if k)
    if not used:
        zero = (0,) * nvars
        return {zero: _igcd(f.get(zero, 0), g.get(zero, 0))}
    cf, cg = _int_content(f), _int_content(g)
    gc = _igcd(cf, cg)
    f = {e: c // cf for e, c in f.items()}
    g = {e: c // cg for e, c in g.items()}
    v = max(used)
    nf = max(abs(c) for c in f.values())
    ng = max(abs(c) for c in g.values())
    x = 2 * min(nf, ng) + 29
    for _ in range(6):
        ff, gg = _eval_var(f, v, x), _eval_var(g, v, x)
        if ff and gg:
            h = _heu(ff, gg, nvars, depth + 1)
            if h is not None:
                H = _interpolate(h, v, x)
                if H:
                    c = _int_content(H)
                    H = {e: k // c for e, k in H.items()}
                    if _int_divides(H, f, nvars) and _int_divides(H, g, nvars):
                        return {e: k * gc for e, k in H.items()}
        x = 73794 * x * _isqrt(_isqrt(x)) // 27011
    return None


def _heuristic_gcd(a: Poly, b: Poly) -> Poly | None:
    h = _heu(_to_int_terms(a), _to_int_terms(b), a.nvars)
    if h is None:
        return None
    return Poly(a.nvars, h).monic()


def lcm(a: Poly, b: Poly) -> Poly:
    return (a * b).divexact(gcd(a, b)).monic()
