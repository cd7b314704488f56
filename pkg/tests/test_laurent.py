import pytest
import sympy as sp
from hypothesis import assume, given
from hypothesis import strategies as st

from commutant import LinearForm, Poly, RatFunc, laurent_along, qq, substitute_linear
from commutant.laurent import LaurentError, complete_frame, frame_substitution
from commutant.linalg import dot, inverse
from oracles import is_zero, ratfunc_to_sympy, sympy_to_ratfunc, syms
from strategies import ratfuncs

X = syms(3)
x1, x2, x3 = X


def R(expr, n=3):
    return sympy_to_ratfunc(sp.sympify(expr, locals={"x1": x1, "x2": x2, "x3": x3}), X[:n])


def sympy_laurent(f: RatFunc, alpha, k):
    """Coefficient of ``<alpha, x>^k`` computed by sympy series in the frame coordinates."""
    n = len(alpha)
    frame = complete_frame(alpha)
    sub = frame_substitution(frame)
    ys = sp.symbols(f"y1:{n + 1}")
    xs = X[:n]
    expr = ratfunc_to_sympy(f, xs)
    repl = {
        xs[i]: sum(sp.Rational(str(sub[i][j])) * ys[j] for j in range(n)) for i in range(n)
    }
    # shift by a generous power so the series is an ordinary Taylor expansion
    shift = 6
    g = sp.cancel(sp.together(expr.subs(repl, simultaneous=True)) * ys[0] ** shift)
    s = sp.series(g, ys[0], 0, k + shift + 1).removeO()
    c = sp.expand(s).coeff(ys[0], k + shift)
    return sympy_to_ratfunc(sp.together(c), list(ys[1:]))


def test_linear_form_rejects_zero():
    with pytest.raises(ValueError):
        LinearForm([0, 0])


def test_frame_is_orthogonal_and_starts_with_alpha():
    fr = complete_frame([1, -1, 0])
    assert fr[0] == tuple(qq(c) for c in (1, -1, 0))
    for i in range(3):
        for j in range(i + 1, 3):
            assert dot(fr[i], fr[j]) == 0
    assert fr[1] == (qq("1/2"), qq("1/2"), 0)


def test_double_pole():
    C = qq("7/3")
    f = RatFunc.pole(Poly.linear([1, -1, 0]), 2, C)
    sl = laurent_along(f, [1, -1, 0])
    assert sl.min_order == -2
    assert sl.pole_order() == 2
    assert sl.coefficient(-2) == RatFunc.const(2, C)
    assert all(sl.coefficient(k).is_zero() for k in range(-1, sl.k_max + 1))


def test_default_k_max_is_four_past_the_pole():
    sl = laurent_along(R("1/(x1 - x2)**2"), [1, -1, 0])
    assert sl.k_max == 2
    with pytest.raises(KeyError):
        sl.coefficient(3)


def test_simple_pole_partial_fractions():
    f = R("1/((x1 - x2)*(x1 - x3))")
    sl = laurent_along(f, [1, -1, 0])
    assert sl.min_order == -1
    # on the hyperplane x1 = x2 = y2, x3 = y3
    y2, y3 = sp.symbols("y2 y3")
    assert sl.coefficient(-1) == sympy_to_ratfunc(1 / (y2 - y3), [y2, y3])
    assert sl.coefficient(-1) == sympy_laurent(f, [1, -1, 0], -1)


def test_regular_function_has_no_pole():
    sl = laurent_along(R("x1*x3/(x2 + x3)"), [1, -1, 0], 2)
    assert sl.pole_order() == 0
    assert sl.min_order == 0


def test_zero_function():
    sl = laurent_along(RatFunc.zero(3), [1, 0, 0])
    assert sl.coeffs == {}
    assert sl.pole_order() == 0


def test_nonlinear_denominator_factor():
    f = R("1/((x1 - x2)*(x1**2 + x3**2 + 1))")
    for k in (-1, 0, 1):
        assert laurent_along(f, [1, -1, 0], 1).coefficient(k) == sympy_laurent(f, [1, -1, 0], k)


def test_form_hidden_in_quadratic_factor():
    # (x1 - x2)(x1 + x2 + x3) enters as one quadratic factor; the pole is still found
    q = Poly.var(3, 0) ** 2 - Poly.var(3, 1) ** 2 + Poly.var(3, 2) * Poly.linear([1, -1, 0])
    f = RatFunc(Poly.one(3), Poly.linear([1, -1, 0]) * q)
    sl = laurent_along(f, [1, -1, 0], 0)
    assert sl.min_order == -2
    assert sl.coefficient(-2) == sympy_laurent(f, [1, -1, 0], -2)


def test_pair_coupling_functional_left_side():
    """Leading coefficient of the triple-product left side along x1 - x2.

    With distinct pair couplings the left side has a pole of order three on
    x1 = x2 whose coefficient is proportional to C12 (C13 - C23).
    """
    C12, C13, C23 = 2, 3, 5
    u = {(0, 1): C12, (0, 2): C13, (1, 2): C23}
    xs = X

    def uu(a, b):
        return u[(min(a, b), max(a, b))] / (xs[a] - xs[b]) ** 2

    def du(a, b):
        return -2 * u[(min(a, b), max(a, b))] / (xs[a] - xs[b]) ** 3

    lhs = 0
    for i in range(3):
        for j in range(i + 1, 3):
            inner = sum(uu(p, j) - uu(p, i) for p in range(3) if p not in (i, j))
            lhs += inner * du(i, j)
    f = sympy_to_ratfunc(sp.together(lhs), xs)
    sl = laurent_along(f, [1, -1, 0])
    assert sl.min_order == -3
    expected = sympy_laurent(f, [1, -1, 0], -3)
    assert sl.coefficient(-3) == expected
    # frozen value: -2 C12 (C23 - C13) / (y3 - y2)^2 with y2 on the hyperplane
    y2, y3 = sp.symbols("y2 y3")
    frozen = sympy_to_ratfunc(-2 * C12 * (C23 - C13) / (y3 - y2) ** 2, [y2, y3])
    assert sl.coefficient(-3) == frozen


@pytest.mark.parametrize("alpha", [[1, -1, 0], [1, 1, 0], [0, 0, 1], [1, 2, -1]])
def test_coefficients_match_sympy_series(alpha):
    f = R("(x1 + 2*x3)/((x1 - x2)**2*(x1 + x2)*x3)")
    sl = laurent_along(f, alpha, 1)
    for k in range(sl.min_order, 2):
        assert sl.coefficient(k) == sympy_laurent(f, alpha, k)


def _resum_agrees(f, form, k_max):
    try:
        sl = laurent_along(f, form, k_max)
    except LaurentError:
        return None
    diff = f - sl.resum()
    if diff.is_zero():
        return True
    n = f.nvars
    ell = Poly.linear(list(form) + [0] * (n - len(form)))
    shifted = diff * RatFunc.pole(ell, k_max + 1)
    return laurent_along(shifted, form, 0).min_order >= 0


def test_resummation_example():
    assert _resum_agrees(R("1/((x1 - x2)**2*(x1 - x3))"), [1, -1, 0], 3)


@given(
    ratfuncs(3),
    st.sampled_from([[1, -1, 0], [1, 1, 0], [1, 0, 0], [0, 2, -1], [1, 1, 1]]),
    st.integers(min_value=0, max_value=3),
)
def test_resummation_agrees_modulo_truncation(f, form, k_max):
    ok = _resum_agrees(f, form, k_max)
    assume(ok is not None)
    assert ok


def test_substitute_identity():
    f = R("x1")
    assert substitute_linear(f, [[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == f


def test_substitute_concentrates_pole():
    f = R("1/(x1 - x2)**2")
    # x1 = (y1 + y2)/2, x2 = (y2 - y1)/2 so x1 - x2 = y1
    A = [[qq("1/2"), qq("1/2"), 0], [qq("-1/2"), qq("1/2"), 0], [0, 0, 1]]
    assert substitute_linear(f, A) == R("1/x1**2")


def test_substitute_orthogonal_quadratic():
    f = R("x1**2 + x2**2", 2)
    A = [[qq("3/5"), qq("-4/5")], [qq("4/5"), qq("3/5")]]
    assert substitute_linear(f, A) == f


def test_substitute_singular_rejected():
    with pytest.raises(ValueError):
        substitute_linear(R("x1", 2), [[1, 1], [2, 2]])


invertible = st.lists(st.lists(st.integers(-2, 2), min_size=2, max_size=2), min_size=2, max_size=2).filter(
    lambda m: m[0][0] * m[1][1] - m[0][1] * m[1][0] != 0
)


@given(ratfuncs(2), invertible)
def test_substitute_inverse_roundtrip(f, A):
    g = substitute_linear(f, A)
    assert substitute_linear(g, inverse([[qq(c) for c in r] for r in A])) == f
    # the oracle agrees on the substituted function
    y = syms(2)
    sub = {X[i]: sum(A[i][j] * y[j] for j in range(2)) for i in range(2)}
    assert is_zero(ratfunc_to_sympy(f, X[:2]).subs(sub, simultaneous=True) - ratfunc_to_sympy(g, X[:2]))
