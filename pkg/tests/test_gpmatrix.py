import random
from fractions import Fraction

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from conftest import rat
from hypercf.errors import DegenerateMatrix, PreconditionViolated
from hypercf.gpmatrix import (
    GPolyMatrix, composed_lccm, const_inverse, const_rank, degree_violations,
    invert_unitriangular, lccm_commutes, reduce_shifts, separate, sort_by_degree,
)
from hypercf.gpoly import GPoly
from hypercf.oracle import check_identity
from hypercf.scalars import ConstField, DelayBasis, Exponent
from hypercf.system import build_H, build_benchmark, random_system, strings_demo_matrix

B = DelayBasis({"pi": "pi"})
PI = B["pi"]
F = ConstField.rational


def test_benchmark_lccm_rank_one():
    H = build_benchmark(PI, 10, 1, B)
    assert composed_lccm(H) == [[F(0), F(0)], [F(Fraction(1, 4)), F(Fraction(1, 4))]]
    assert const_rank(composed_lccm(H)) == 1
    assert lccm_commutes(H)


def test_identity_lccm():
    I = GPolyMatrix.identity(3, B)
    for order in ("sigma_dt", "dt_sigma"):
        for sigma in ("plus", "diam"):
            got = composed_lccm(I, order, sigma)
            assert got == [[F(int(i == j)) for j in range(3)] for i in range(3)]


def test_zero_column_is_degenerate():
    with pytest.raises(DegenerateMatrix):
        composed_lccm(GPolyMatrix.zeros(2, 2, B))


def test_sort_benchmark_is_identity():
    rp, cp, _ = sort_by_degree(strings_demo_matrix())
    assert rp == [0, 1] and cp == [0, 1]


def test_sort_recovers_swap():
    H = strings_demo_matrix()
    rp, _, Hs = sort_by_degree(H.permuted(row_perm=[1, 0]))
    assert rp == [1, 0] and Hs == H


def test_sort_one_by_one():
    M = GPolyMatrix([[GPoly.monomial(PI, 1, B)]], B)
    assert sort_by_degree(M)[:2] == ([0], [0])


def test_benchmark_reduction():
    H = strings_demo_matrix()
    red = reduce_shifts(H)
    assert [(i, j) for _, i, j, _ in red.reductions] == [(1, 0)]
    assert red.Hbar[0, 1] == H[0, 1] and red.Hbar[0, 0] == H[0, 0]
    assert not degree_violations(red.Hbar)
    assert composed_lccm(red.Hbar) == [[F(1), F(0)], [F(0), F(2)]]
    assert red.Hbar == red.L @ red.H


def test_diagonal_needs_no_work():
    D = GPolyMatrix.diag([GPoly.monomial(PI, rat([0, 1]), B), GPoly.monomial(2 * PI, 3, B)], B)
    red = reduce_shifts(D)
    assert red.L == GPolyMatrix.identity(2, B) and red.passes == 0 and not red.reductions


def test_invert_unitriangular():
    I = GPolyMatrix.identity(3, B)
    assert invert_unitriangular(I) == I
    q = GPoly([(PI, rat([1], [2, 1])), (Exponent.const(1), 3)], B)
    L = I.replaced(1, 0, -q)
    assert invert_unitriangular(L)[1, 0] == q
    with pytest.raises(PreconditionViolated):
        invert_unitriangular(I.replaced(0, 1, q))


def test_invert_benchmark_L():
    L = reduce_shifts(strings_demo_matrix()).L
    Li = invert_unitriangular(L)
    assert check_identity(L @ Li, GPolyMatrix.identity(2, B), tol="1e-25").passed


def test_separation_benchmark():
    sep = separate(reduce_shifts(strings_demo_matrix()).Hbar)
    assert sep.Hhat == [[F(1), F(0)], [F(0), F(2)]]
    assert sep.K == [(2, PI), (0, Exponent.const(10))]
    assert sep.tau_check == [-PI, Exponent.const(-10)]


def test_separation_of_monomial_diagonal():
    D = GPolyMatrix.diag([GPoly.monomial(PI, rat([0, 0, 5]), B), GPoly.monomial(-PI, 2, B)], B)
    sep = separate(D)
    assert all(e.is_zero() for row in sep.Htilde.rows for e in row)
    assert sep.Hhat == [[F(5), F(0)], [F(0), F(2)]]


def test_const_inverse():
    M = [[F(2), F(1)], [F(1), F(1)]]
    Mi = const_inverse(M)
    prod = [[sum((M[i][k] * Mi[k][j] for k in range(2)), F(0)) for j in range(2)] for i in range(2)]
    assert prod == [[F(1), F(0)], [F(0), F(1)]]


@hsettings(max_examples=5, deadline=None)
@given(st.integers(0, 10**4))
def test_reduction_postconditions(seed):
    H = build_H(random_system(seed, 3, 2))
    red = reduce_shifts(H)
    n = H.shape[0]
    assert not degree_violations(red.Hbar)
    assert lccm_commutes(red.Hbar)
    assert const_rank(composed_lccm(red.Hbar)) == n
    assert check_identity(red.Hbar, red.L @ red.H, trials=8, tol="1e-25").passed
    sep = separate(red.Hbar)
    assert check_identity(red.Hbar, sep.Hhat_matrix(B) @ sep.K_matrix(B) + sep.Htilde,
                          trials=8, tol="1e-25").passed
