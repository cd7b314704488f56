"""Reduced rational functions over Q.

A :class:`RatFunc` stores a numerator polynomial and a denominator kept in
partially factored form: a product of distinct monic degree-one factors with
multiplicities times one monic remainder ``h`` that none of the listed linear
factors divides.  Every operator coefficient in this package has a product of
linear forms as its denominator, so ``h`` is almost always 1 and cancellation
reduces to trial division by known linear factors.  General denominators fall
back to the multivariate gcd in :mod:`commutant.poly`.

The canonical form is ``num / den`` with ``gcd(num, den) = 1`` and ``den``
monic under the graded lexicographic order; two values are equal exactly when
their canonical forms are.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from ._backend import ONE, qq
from .poly import Poly, gcd, lcm, linear_divides


class RatFunc:
    __slots__ = ("num", "lin", "h", "_den", "_hash")

    def __init__(self, num, den=None, nvars: int | None = None):
        if not isinstance(num, Poly):
            if nvars is None:
                if isinstance(den, Poly):
                    nvars = den.nvars
                else:
                    raise ValueError("nvars is required for constant input")
            num = Poly.const(nvars, num)
        if den is None:
            den = Poly.one(num.nvars)
        elif not isinstance(den, Poly):
            den = Poly.const(num.nvars, den)
        if den.nvars != num.nvars:
            raise ValueError("numerator and denominator live in different rings")
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if den.is_constant():
            lin, h = {}, Poly.one(num.nvars)
        elif den.total_degree() == 1:
            lin, h = {den: 1}, Poly.one(num.nvars)
        else:
            lin, h = {}, den
        other = RatFunc._build(num, lin, h)
        self.num, self.lin, self.h = other.num, other.lin, other.h
        self._den = other._den
        self._hash = None

    # -- internal construction ---------------------------------------------
    @classmethod
    def _raw(cls, num: Poly, lin: dict, h: Poly) -> "RatFunc":
        r = object.__new__(cls)
        r.num = num
        r.lin = lin
        r.h = h
        r._den = None
        r._hash = None
        return r

    @classmethod
    def _build(cls, num: Poly, lin: Mapping[Poly, int], h: Poly) -> "RatFunc":
        """Normalize ``num / (prod lin^e * h)`` into canonical form."""
        n = num.nvars
        if num.is_zero():
            return cls._raw(num, {}, Poly.one(n))
        scalar = ONE
        merged: dict[Poly, int] = {}
        for f, e in lin.items():
            if e <= 0:
                continue
            c = f.lc()
            if c != 1:
                scalar *= c**e
                f = f.monic()
            merged[f] = merged.get(f, 0) + e
        if not h.is_one():
            if h.is_constant():
                scalar *= h.constant_value()
                h = Poly.one(n)
            else:
                c = h.lc()
                if c != 1:
                    scalar *= c
                    h = h.monic()
                for f in list(merged):
                    while True:
                        q = linear_divides(f, h)
                        if q is None:
                            break
                        h = q
                        merged[f] += 1
                if h.total_degree() == 1:
                    c = h.lc()
                    scalar *= c
                    f = h.monic()
                    merged[f] = merged.get(f, 0) + 1
                    h = Poly.one(n)
                elif h.is_constant():
                    scalar *= h.constant_value()
                    h = Poly.one(n)
        if scalar != 1:
            num = num.scale(ONE / scalar)
        for f in list(merged):
            e = merged[f]
            while e:
                q = linear_divides(f, num)
                if q is None:
                    break
                num = q
                e -= 1
            if e:
                merged[f] = e
            else:
                del merged[f]
        if not h.is_one():
            g = gcd(num, h)
            if not g.is_one():
                num = num.divexact(g)
                h = h.divexact(g)
                c = h.lc()
                if c != 1:
                    num = num.scale(ONE / c)
                    h = h.monic()
        return cls._raw(num, merged, h)

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "RatFunc":
        return cls._raw(Poly.zero(nvars), {}, Poly.one(nvars))

    @classmethod
    def one(cls, nvars: int) -> "RatFunc":
        return cls._raw(Poly.one(nvars), {}, Poly.one(nvars))

    @classmethod
    def const(cls, nvars: int, c) -> "RatFunc":
        return cls._raw(Poly.const(nvars, c), {}, Poly.one(nvars))

    @classmethod
    def from_poly(cls, p: Poly) -> "RatFunc":
        return cls._raw(p, {}, Poly.one(p.nvars))

    @classmethod
    def var(cls, nvars: int, i: int) -> "RatFunc":
        return cls.from_poly(Poly.var(nvars, i))

    @classmethod
    def pole(cls, form: Poly, order: int, coeff=1) -> "RatFunc":
        """``coeff / form**order`` for a degree-one polynomial ``form``."""
        if form.total_degree() != 1:
            raise ValueError("pole() expects a degree-one polynomial")
        num = coeff if isinstance(coeff, Poly) else Poly.const(form.nvars, coeff)
        if order <= 0:
            return cls.from_poly(num * form ** (-order))
        return cls._build(num, {form: order}, Poly.one(form.nvars))

    # -- accessors ----------------------------------------------------------
    @property
    def nvars(self) -> int:
        return self.num.nvars

    @property
    def den(self) -> Poly:
        if self._den is None:
            d = self.h
            for f, e in sorted(self.lin.items(), key=lambda fe: repr(fe[0])):
                d = d * f**e
            self._den = d
        return self._den

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return not self.lin and self.h.is_one()

    def is_constant(self) -> bool:
        return self.is_poly() and self.num.is_constant()

    def constant_value(self):
        if not self.is_poly():
            raise ValueError("not a constant")
        return self.num.constant_value()

    def variables(self) -> set[int]:
        out = self.num.variables() | self.h.variables()
        for f in self.lin:
            out |= f.variables()
        return out

    def linear_factors(self) -> dict[Poly, int]:
        return dict(self.lin)

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "RatFunc":
        if isinstance(other, RatFunc):
            if other.nvars != self.nvars:
                raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
            return other
        if isinstance(other, Poly):
            return RatFunc.from_poly(other)
        return RatFunc.const(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        return RatFunc.sum([self, other])

    __radd__ = __add__

    def __neg__(self):
        return RatFunc._raw(-self.num, self.lin, self.h)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, (RatFunc, Poly)):
            c = qq(other)
            if c == 0:
                return RatFunc.zero(self.nvars)
            return RatFunc._raw(self.num.scale(c), self.lin, self.h)
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            return RatFunc.zero(self.nvars)
        if other.is_poly() and self.is_poly():
            return RatFunc.from_poly(self.num * other.num)
        # cancel crosswise before multiplying
        a = RatFunc._cross(self.num, other.lin, other.h)
        b = RatFunc._cross(other.num, self.lin, self.h)
        an, alin, ah = a
        bn, blin, bh = b
        lin: dict = {}
        for f, e in alin.items():
            lin[f] = lin.get(f, 0) + e
        for f, e in blin.items():
            lin[f] = lin.get(f, 0) + e
        return RatFunc._build(an * bn, lin, ah * bh)

    __rmul__ = __mul__

    @staticmethod
    def _cross(num: Poly, lin: Mapping[Poly, int], h: Poly):
        """Cancel ``num`` against a canonical denominator ``lin, h``."""
        out = {}
        for f, e in lin.items():
            while e:
                q = linear_divides(f, num)
                if q is None:
                    break
                num = q
                e -= 1
            if e:
                out[f] = e
        if not h.is_one():
            g = gcd(num, h)
            if not g.is_one():
                num = num.divexact(g)
                h = h.divexact(g)
        return num, out, h

    def inverse(self) -> "RatFunc":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        den = self.h
        for f, e in self.lin.items():
            den = den * f**e
        num = self.num
        if num.total_degree() == 1:
            return RatFunc._build(den, {num: 1}, Poly.one(self.nvars))
        return RatFunc._build(den, {}, num)

    def __truediv__(self, other):
        if not isinstance(other, (RatFunc, Poly)):
            c = qq(other)
            if c == 0:
                raise ZeroDivisionError("division by zero")
            return self * (ONE / c)
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return RatFunc.one(self.nvars)
        lin = {f: e * k for f, e in self.lin.items()}
        return RatFunc._raw(self.num**k, lin, self.h**k)

    @classmethod
    def sum(cls, items: Iterable["RatFunc"], nvars: int | None = None) -> "RatFunc":
        """Sum over a common denominator with a single cancellation pass."""
        items = [r for r in items if not r.is_zero()]
        if not items:
            if nvars is None:
                raise ValueError("nvars is required for an empty sum")
            return cls.zero(nvars)
        if len(items) == 1:
            return items[0]
        n = items[0].nvars
        if all(r.is_poly() for r in items):
            total = Poly.zero(n)
            for r in items:
                total = total + r.num
            return cls.from_poly(total)
        E: dict[Poly, int] = {}
        H = Poly.one(n)
        for r in items:
            for f, e in r.lin.items():
                if E.get(f, 0) < e:
                    E[f] = e
            if not r.h.is_one():
                H = r.h if H.is_one() else lcm(H, r.h)
        powers: dict = {}

        def power(f, k):
            key = (f, k)
            p = powers.get(key)
            if p is None:
                p = f**k
                powers[key] = p
            return p

        total = Poly.zero(n)
        for r in items:
            t = r.num
            for f, e in E.items():
                k = e - r.lin.get(f, 0)
                if k:
                    t = t * power(f, k)
            if not H.is_one() and H != r.h:
                t = t * H.divexact(r.h)
            total = total + t
        return cls._build(total, E, H)

    # -- calculus -----------------------------------------------------------
    def diff(self, i: int, times: int = 1) -> "RatFunc":
        r = self
        for _ in range(times):
            r = r._diff1(i)
        return r

    def _diff1(self, i: int) -> "RatFunc":
        if self.is_zero():
            return self
        if self.is_poly():
            return RatFunc.from_poly(self.num.diff(i))
        dep = [(f, e) for f, e in self.lin.items() if f.degree(i) > 0]
        h_dep = self.h.degree(i) > 0
        if not dep and not h_dep:
            return RatFunc._build(self.num.diff(i), self.lin, self.h)
        n = self.nvars
        M = Poly.one(n)
        for f, _ in dep:
            M = M * f
        new_num = self.num.diff(i) * M
        for f, e in dep:
            others = Poly.one(n)
            for g, _ in dep:
                if g is not f:
                    others = others * g
            a = f.diff(i)
            new_num = new_num - self.num * others * a.scale(e)
        lin = dict(self.lin)
        for f, e in dep:
            lin[f] = e + 1
        if h_dep:
            new_num = new_num * self.h - self.num * M * self.h.diff(i)
            return RatFunc._build(new_num, lin, self.h * self.h)
        return RatFunc._build(new_num, lin, self.h)

    # -- evaluation / substitution -------------------------------------------
    def evaluate(self, point: Sequence):
        d = self.h.evaluate(point)
        for f, e in self.lin.items():
            d *= f.evaluate(point) ** e
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at the evaluation point")
        return self.num.evaluate(point) / d

    def compose_linear(self, rows: Sequence[Sequence], new_nvars: int | None = None) -> "RatFunc":
        """Substitute ``x_i -> sum_j rows[i][j] y_j``."""
        m = new_nvars if new_nvars is not None else len(rows[0])
        num = self.num.compose_linear(rows, m)
        lin: dict = {}
        scalar_h = Poly.one(m)
        for f, e in self.lin.items():
            g = f.compose_linear(rows, m)
            if g.is_zero():
                raise ZeroDivisionError("substitution sends a denominator factor to zero")
            if g.is_constant():
                scalar_h = scalar_h * g**e
            else:
                lin[g] = lin.get(g, 0) + e
        h = self.h.compose_linear(rows, m) if not self.h.is_one() else Poly.one(m)
        if h.is_zero():
            raise ZeroDivisionError("substitution sends the denominator to zero")
        return RatFunc._build(num, lin, h * scalar_h)

    def embed(self, new_nvars: int, mapping: Sequence[int]) -> "RatFunc":
        lin = {f.embed(new_nvars, mapping): e for f, e in self.lin.items()}
        return RatFunc._raw(self.num.embed(new_nvars, mapping), lin, self.h.embed(new_nvars, mapping))

    def partial_eval(self, values: Mapping[int, object]) -> "RatFunc":
        lin: dict = {}
        h = self.h.partial_eval(values)
        for f, e in self.lin.items():
            g = f.partial_eval(values)
            if g.is_zero():
                raise ZeroDivisionError("evaluation hits a pole")
            if g.is_constant():
                h = h * g**e
            else:
                lin[g] = lin.get(g, 0) + e
        if h.is_zero():
            raise ZeroDivisionError("evaluation hits a pole")
        return RatFunc._build(self.num.partial_eval(values), lin, h)

    # -- comparison ---------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, RatFunc):
            if isinstance(other, Poly):
                other = RatFunc.from_poly(other)
            else:
                try:
                    return self.is_constant() and self.constant_value() == qq(other)
                except (TypeError, ValueError):
                    return NotImplemented
        if self.nvars != other.nvars:
            return False
        if self.num != other.num:
            return False
        if self.h.is_one() and other.h.is_one():
            return self.lin == other.lin
        return self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    def to_str(self, names: Sequence[str] | None = None) -> str:
        if self.is_poly():
            return self.num.to_str(names)
        return f"({self.num.to_str(names)}) / ({self.den.to_str(names)})"

    def __repr__(self):
        return f"RatFunc({self.to_str()})"


def ratfunc_arith(a: RatFunc, b: RatFunc, op: str) -> RatFunc:
    """Binary arithmetic by operation name: ``add``, ``sub``, ``mul`` or ``div``."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")
