from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from hypercf.errors import DivisionByZero, DomainError
from hypercf.scalars import (
    ConstField, DelayBasis, Exponent, Ordering, Symbol, exponent_compare, parse_const,
    parse_exponent,
)

BASIS = DelayBasis({"pi": "pi", "beta": "10"})
PI, BETA = BASIS["pi"], BASIS["beta"]


def test_pi_below_ten():
    assert exponent_compare(PI, BETA, BASIS) is Ordering.LT


def test_reflexive():
    assert exponent_compare(PI, PI) is Ordering.EQ


def test_close_exponents_ordered_numerically():
    # 10 - 3pi = 0.575..., -10 + 4pi = 2.566...
    assert exponent_compare(10 - 3 * PI, -10 + 4 * PI) is Ordering.LT


def test_exponent_arithmetic_is_formal():
    assert PI - PI == Exponent.const(0)
    assert not (2 * PI + 1).is_rational()
    assert Exponent.const(Fraction(1, 3)).is_rational()
    assert parse_exponent("10 - 3*pi", BASIS) == 10 - 3 * PI


def test_exp_zero_is_one():
    assert ConstField.exp(Exponent.const(0)).is_one()


def test_exp_cancellation():
    assert ConstField.exp(PI) * ConstField.exp(-PI) == ConstField.rational(1)


def test_exp_value():
    v = ConstField.exp(6 * PI - 20, 16).to_mp()
    assert abs(v - mpmath.mpf("5.0637")) < 5e-4
    assert abs(v - 16 * mpmath.exp(6 * mpmath.pi - 20)) < mpmath.mpf(10) ** -45


def test_difference_of_squares():
    e, one = ConstField.exp(PI), ConstField.rational(1)
    assert (e + one) * (e - one) == ConstField.exp(2 * PI) - one


def test_field_identities():
    x = parse_const("3*exp(pi) - 2", BASIS)
    assert x + ConstField.rational(0) == x
    assert (x * x.inv()).is_one()


def test_zero_inverse():
    with pytest.raises(DivisionByZero):
        ConstField.rational(0).inv()


def test_bad_symbols():
    with pytest.raises(DomainError):
        Symbol("dt", "1")
    with pytest.raises(DomainError):
        Symbol("a", "-1")


fracs = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@given(fracs, fracs, fracs)
def test_rational_field_laws(a, b, c):
    A, B, C = (ConstField.rational(v) for v in (a, b, c))
    assert (A + B) * C == A * C + B * C
    ab = a * b
    assert (A * B).to_mp() == mpmath.mpf(ab.numerator) / ab.denominator


@given(fracs, fracs)
def test_exp_multiplicative(a, b):
    x, y = ConstField.exp(a * PI), ConstField.exp(b * PI)
    assert x * y == ConstField.exp((a + b) * PI)


@given(fracs, fracs, fracs)
def test_compare_consistent_with_values(a, b, c):
    e1 = a * PI + b
    e2 = c * PI
    want = (e1.value > e2.value) - (e1.value < e2.value)
    got = exponent_compare(e1, e2)
    assert got is {1: Ordering.GT, 0: Ordering.EQ, -1: Ordering.LT}[want]
