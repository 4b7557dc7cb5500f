"""Random instances shared by the property tests and the acceptance suite."""

import random
from fractions import Fraction

from hypercf.division import gpld
from hypercf.gpmatrix import const_rank
from hypercf.system import controllability_rank, flat_parametrize
from hypercf.gpoly import GPoly, PolyD, RatD
from hypercf.scalars import DelayBasis, Exponent, compare

# rationally independent to working precision, so distinct formal exponents
# never coincide numerically
DELAY_VALUES = ("pi", "e", "1.4142135623730950488016887242096980785696718753769")


def random_basis(rng: random.Random) -> DelayBasis:
    k = rng.randint(1, 3)
    specs = rng.sample(DELAY_VALUES, k)
    return DelayBasis({f"d{i}": s for i, s in enumerate(specs)})


def random_exponent(rng, basis) -> Exponent:
    e = Exponent.const(Fraction(rng.randint(-4, 4), rng.choice((1, 2))))
    for name in basis.names:
        e = e + rng.randint(-2, 2) * basis[name]
    return e


def random_poly(rng, deg, lo=-3, hi=3) -> PolyD:
    while True:
        c = [rng.randint(lo, hi) for _ in range(deg + 1)]
        if any(c):
            return PolyD(c)


def random_ratd(rng, deg, den=True) -> RatD:
    num = random_poly(rng, deg)
    if den and rng.random() < 0.4:
        return RatD(num, PolyD([rng.randint(-3, 3), 1]))
    return RatD(num)


def random_gpoly(rng, basis, nterms, deg, den=True) -> GPoly:
    while True:
        g = GPoly([(random_exponent(rng, basis), random_ratd(rng, rng.randint(0, deg), den))
                   for _ in range(nterms)], basis)
        if not g.is_zero():
            return g


def division_steps(x, y):
    """Rough number of single-term division steps, from the term gaps of ``y``."""
    es = [e.value for e, _ in y.terms]
    if len(es) == 1:
        return len(x.terms)
    up = max(x.deg_plus.value - y.deg_plus.value, 0) / (es[0] - es[1])
    down = max(y.deg_minus.value - x.deg_minus.value, 0) / (es[-2] - es[-1])
    return float(up + down)


MAX_STEPS = 10
MAX_DEN_DEGREE = 16


def division_pair(rng):
    """(x, y) over a random 1-3 delay basis with degσ x >= degσ y.

    Pairs needing more than MAX_STEPS division steps are redrawn.
    """
    basis = random_basis(rng)
    y = random_gpoly(rng, basis, rng.randint(1, 3), 2)
    while True:
        if rng.random() < 0.5:
            # known quotient and admissible remainder
            q0 = random_gpoly(rng, basis, rng.randint(1, 2), 1)
            x = q0 * y
            if rng.random() < 0.5:
                r0 = random_gpoly(rng, basis, 1, 2)
                x = x + r0
        else:
            x = random_gpoly(rng, basis, rng.randint(1, 4), 2)
        if x.is_zero() or compare(x.deg_sigma, y.deg_sigma) < 0:
            continue
        if division_steps(x, y) <= MAX_STEPS:
            return x, y


def _rational_root_poly(rng, deg) -> PolyD:
    roots = [Fraction(rng.randint(-4, 4), rng.choice((1, 1, 2)))]
    while len(roots) < deg:
        # repeated roots on purpose
        roots.append(rng.choice(roots) if rng.random() < 0.5 else Fraction(rng.randint(-4, 4)))
    return PolyD.from_roots(roots).scale(Fraction(rng.choice((-3, -2, -1, 1, 2, 3))))


def entire_pair(rng):
    """(x, y) with polynomial coefficients whose quotient has rational poles.

    The extreme coefficients of ``y`` have full degree ``deg_dt y`` and only
    rational (often repeated) roots, so every root of the quotient
    denominator is rational and the quotient is proper.
    """
    basis = random_basis(rng)
    while True:
        nu = rng.randint(1, 3)
        e_hi, e_lo = random_exponent(rng, basis), random_exponent(rng, basis)
        if compare(e_hi, e_lo) <= 0:
            continue
        terms = [(e_hi, RatD(_rational_root_poly(rng, nu))),
                 (e_lo, RatD(_rational_root_poly(rng, nu)))]
        if rng.random() < 0.5:
            mid = (e_hi + e_lo) * Fraction(1, 2)
            terms.append((mid, RatD(random_poly(rng, nu))))
        y = GPoly(terms, basis)
        x = random_gpoly(rng, basis, rng.randint(1, 3), nu, den=False)
        if x.deg_dt > y.deg_dt:
            continue
        if compare(x.deg_plus, y.deg_plus) > 0 and compare(x.deg_sigma, y.deg_sigma) >= 0:
            if compare(x.deg_minus, y.deg_minus) < 0 and division_steps(x, y) <= MAX_STEPS:
                if gpld(x, y).common_den.deg <= MAX_DEN_DEGREE:
                    return x, y


def random_pair(rng):
    """Controllable (F, B) with n <= 6 states and full column rank B."""
    n = rng.randint(1, 6)
    k = rng.randint(1, min(n, 4))
    while True:
        F = [[Fraction(rng.randint(-3, 3)) for _ in range(n)] for _ in range(n)]
        Bm = [[Fraction(rng.randint(-3, 3)) for _ in range(k)] for _ in range(n)]
        if const_rank(Bm) == k and controllability_rank(F, Bm) == n:
            return F, Bm


def flat_ok(F, Bm):
    """Residual zero, D column reduced and cdeg N < cdeg D, column by column."""
    fp = flat_parametrize(F, Bm)
    zero = all(p.is_zero() for row in fp.residual(F, Bm) for p in row)
    dN, dD = fp.column_degrees(fp.N), fp.column_degrees(fp.D)
    return zero and fp.is_column_reduced() and all(a < b for a, b in zip(dN, dD))
