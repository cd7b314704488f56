"""Rational number backend.

All coefficient arithmetic goes through ``QQ``.  When gmpy2 is importable the
GMP-backed ``mpq`` type is used; setting ``COMMUTANT_PURE=1`` in the
environment forces the stdlib :class:`fractions.Fraction` path instead.  The
two backends produce identical results; ``benchmarks/bench_backend.py``
compares their speed.
"""

from __future__ import annotations

import os
import re
from fractions import Fraction

_FORCE_PURE = os.environ.get("COMMUTANT_PURE", "").strip().lower() in {"1", "true", "yes"}

try:
    if _FORCE_PURE:
        raise ImportError
    from gmpy2 import mpq as _mpq

    QQ = _mpq
    BACKEND = "gmpy2"
except ImportError:  # pragma: no cover - exercised via the env flag
    QQ = Fraction
    BACKEND = "fractions"

ZERO = QQ(0)
ONE = QQ(1)


_RATIONAL = re.compile(r"([+-]?\d+)(?:\s*/\s*(\d+))?")


def qq(value) -> "QQ":
    """Coerce ints, Fractions, mpq values and ``"p/q"`` strings to ``QQ``."""
    if isinstance(value, str):
        m = _RATIONAL.fullmatch(value.strip())
        if m is None:
            raise ValueError(f"not an exact rational 'p/q': {value!r}")
        value = Fraction(int(m.group(1)), int(m.group(2) or 1))
        return QQ(value.numerator, value.denominator)
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, float):
        raise TypeError("floating-point input is not accepted; pass an exact 'p/q' string")
    return QQ(value)


def numer(q) -> int:
    return int(q.numerator)


def denom(q) -> int:
    return int(q.denominator)


def to_str(q) -> str:
    """Render as the exchange format ``"p/q"`` (denominator always shown)."""
    return f"{numer(q)}/{denom(q)}"


def to_fraction(q) -> Fraction:
    return Fraction(numer(q), denom(q))
