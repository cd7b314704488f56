from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from commutant import BACKEND, qq
from commutant._backend import to_fraction, to_str
from commutant.linalg import (
    SingularMatrixError,
    determinant,
    identity,
    inverse,
    is_orthogonal,
    matmul,
    rank,
    rref,
    solve,
    solve_modular,
)


def test_backend_name():
    assert BACKEND in {"gmpy2", "fractions"}


@pytest.mark.parametrize(
    "value, expected",
    [("3/6", "1/2"), (" -4/2 ", "-2/1"), (7, "7/1"), (Fraction(-2, 8), "-1/4"), ("0", "0/1")],
)
def test_qq_parsing_and_canonical_string(value, expected):
    assert to_str(qq(value)) == expected


def test_qq_rejects_floats():
    with pytest.raises(TypeError):
        qq(0.5)


def test_qq_rejects_zero_denominator():
    with pytest.raises(ZeroDivisionError):
        qq("1/0")


@given(st.fractions(max_denominator=50))
def test_string_round_trip(f):
    assert to_fraction(qq(to_str(qq(f)))) == f


matrices = st.lists(
    st.lists(st.integers(min_value=-4, max_value=4), min_size=3, max_size=3), min_size=3, max_size=3
)


@given(matrices)
def test_determinant_and_rank_match_sympy(m):
    M = sp.Matrix(m)
    assert Fraction(str(determinant([[qq(v) for v in r] for r in m]))) == Fraction(str(M.det()))
    assert rank(m) == M.rank()


@given(matrices)
def test_inverse_is_two_sided(m):
    A = tuple(tuple(qq(v) for v in r) for r in m)
    if determinant(A) == 0:
        with pytest.raises(SingularMatrixError):
            inverse(A)
        return
    B = inverse(A)
    assert matmul(A, B) == identity(3)
    assert matmul(B, A) == identity(3)


def test_rref_pivots():
    m, piv = rref([[qq(1), qq(2), qq(3)], [qq(2), qq(4), qq(6)], [qq(0), qq(1), qq(1)]])
    assert piv == [0, 1]
    assert m[0] == [1, 0, 1]


@given(matrices, st.lists(st.integers(min_value=-5, max_value=5), min_size=3, max_size=3))
def test_solve_and_modular_solve_agree_when_unique(m, b):
    A = [[qq(v) for v in r] for r in m]
    bb = [qq(v) for v in b]
    x = solve(A, bb)
    if determinant(A) == 0:
        return
    assert [sum(a * xi for a, xi in zip(row, x)) for row in A] == bb
    assert solve_modular(A, bb) == x


def test_solve_inconsistent_returns_none():
    assert solve([[qq(1), qq(1)], [qq(1), qq(1)]], [qq(0), qq(1)]) is None
    assert solve_modular([[qq(1), qq(1)], [qq(1), qq(1)]], [qq(0), qq(1)]) is None


def test_orthogonality():
    h = qq("1/2")
    A = [[h, h, h, h], [h, h, -h, -h], [h, -h, h, -h], [h, -h, -h, h]]
    assert is_orthogonal(tuple(tuple(r) for r in A))
    assert not is_orthogonal(((qq(1), qq(1)), (qq(0), qq(1))))
