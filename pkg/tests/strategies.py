"""Hypothesis strategies for small exact objects."""

from fractions import Fraction

from hypothesis import strategies as st

from commutant import DiffOp, Poly, RatFunc, qq

small_q = st.builds(
    lambda a, b: qq(Fraction(a, b)),
    st.integers(min_value=-6, max_value=6),
    st.integers(min_value=1, max_value=4),
)
nonzero_q = small_q.filter(lambda c: c != 0)


@st.composite
def polys(draw, nvars=2, max_terms=4, max_deg=2):
    n = draw(st.integers(min_value=0, max_value=max_terms))
    terms = {}
    for _ in range(n):
        e = tuple(draw(st.integers(min_value=0, max_value=max_deg)) for _ in range(nvars))
        terms[e] = draw(small_q)
    return Poly(nvars, terms)


@st.composite
def linear_forms(draw, nvars=2):
    cs = [draw(st.integers(min_value=-2, max_value=2)) for _ in range(nvars)]
    if all(c == 0 for c in cs):
        cs[0] = 1
    c0 = draw(st.integers(min_value=-2, max_value=2))
    return Poly.linear(cs) + Poly.const(nvars, c0)


@st.composite
def ratfuncs(draw, nvars=2):
    num = draw(polys(nvars))
    den = Poly.one(nvars)
    for _ in range(draw(st.integers(min_value=0, max_value=2))):
        den = den * draw(linear_forms(nvars))
    return RatFunc(num, den)


@st.composite
def diffops(draw, nvars=2, max_order=2, rational=False):
    k = draw(st.integers(min_value=0, max_value=3))
    terms = {}
    for _ in range(k):
        p = tuple(draw(st.integers(min_value=0, max_value=max_order)) for _ in range(nvars))
        if sum(p) > max_order:
            continue
        coeff = draw(ratfuncs(nvars)) if rational else RatFunc.from_poly(draw(polys(nvars, 3, 2)))
        terms[p] = coeff
    return DiffOp(nvars, terms)
