from fractions import Fraction

import mpmath

from hypercf.division import find_roots, make_entire, gpld
from hypercf.gpoly import GPoly, PolyD, RatD
from hypercf.oracle import check_entire, check_identity, eval_symbol, sample_points
from hypercf.scalars import DelayBasis, Exponent
from hypercf.system import build_benchmark, strings_demo_matrix

B = DelayBasis({"pi": "pi"})
PI = B["pi"]


def test_eval_symbol():
    assert eval_symbol(GPoly.const(1), 3) == 1
    assert eval_symbol(GPoly.monomial(PI, 1, B), 0) == 1
    h11 = build_benchmark(PI, 10, 1, B)[0, 0]
    e = mpmath.exp(mpmath.pi)
    assert abs(eval_symbol(h11, 1) - (3 * e - 1 / e) / 4) < mpmath.mpf(10) ** -40


def test_sample_points_deterministic():
    a = [p for p, _ in zip(sample_points(5, seed=3), range(5))]
    b = [p for p, _ in zip(sample_points(5, seed=3), range(5))]
    assert a == b and all(abs(p) <= 5 for p in a)


def test_identity_with_itself():
    x = strings_demo_matrix()[0, 0]
    rep = check_identity(x, x)
    assert rep.passed and rep.max_residual == 0 and rep.points == 64


def test_benchmark_reconstruction():
    H = strings_demo_matrix()
    e = make_entire(gpld(H[1, 0], H[0, 0]))
    assert check_identity(e.qstar * H[0, 0] + e.rstar, H[1, 0]).passed


def test_perturbation_detected():
    x = strings_demo_matrix()[0, 0]
    y = x + GPoly.const(Fraction(1, 10**6), B)
    rep = check_identity(x, y)
    assert not rep.passed and rep.max_residual > 1e-12
    assert rep.line().startswith("FAIL")


def test_corrected_quotient_entire():
    H = strings_demo_matrix()
    e = make_entire(gpld(H[1, 0], H[0, 0]))
    d = PolyD([-4, 0, 1])
    rep = check_entire(e.qstar * RatD(d), find_roots(d))
    assert rep.passed and len(rep.residuals) == 2


def test_polynomial_symbol_entire():
    x = GPoly([(PI, RatD(PolyD([1, 2, 3])))], B)
    assert check_entire(x, []).passed


def test_uncorrected_quotient_diverges():
    H = strings_demo_matrix()
    div = gpld(H[1, 0], H[0, 0])
    d = PolyD([-4, 0, 1])
    rep = check_entire(div.q * RatD(d), find_roots(d))
    assert not rep.passed and rep.max_residual > 1e-10
