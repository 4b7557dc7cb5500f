"""Generalized polynomials in the shift operator with real exponents.

A :class:`GPoly` is a finite sum ``sum a_i(dt) * sigma**alpha_i`` kept in
strictly descending exponent order.  Coefficients are :class:`RatD`, rational
functions of the time derivative ``dt``; a GPoly whose coefficients all have
constant denominators belongs to the polynomial subring.
"""

from __future__ import annotations

import warnings
from fractions import Fraction
from typing import Iterable

import mpmath

from .errors import DegreeOfZero, DivisionByZero, DomainError, ExponentMergeWarning
from .scalars import ONE, ZERO, ConstField, DelayBasis, Exponent, ZERO_EXP, cancel_tol, compare, eps


class PolyD:
    """Polynomial in dt over the constant field, dense ascending coefficients."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Iterable = ()):
        c = [ConstField.coerce(x) for x in coeffs]
        while c and c[-1].is_zero():
            c.pop()
        self.c = tuple(c)

    @classmethod
    def _raw(cls, c):
        p = cls.__new__(cls)
        c = list(c)
        while c and c[-1].is_zero():
            c.pop()
        p.c = tuple(c)
        return p

    @classmethod
    def const(cls, a) -> "PolyD":
        return cls((a,))

    @classmethod
    def monomial(cls, k: int, a=1) -> "PolyD":
        return cls([0] * k + [a])

    @classmethod
    def from_roots(cls, roots) -> "PolyD":
        out = cls((1,))
        for r in roots:
            out = out * cls((-ConstField.coerce(r), 1))
        return out

    @property
    def deg(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return not self.c

    def is_const(self) -> bool:
        return len(self.c) <= 1

    def is_exact(self) -> bool:
        return all(a.is_exact for a in self.c)

    def is_rational(self) -> bool:
        return all(a.is_rational for a in self.c)

    @property
    def lc(self) -> ConstField:
        if not self.c:
            raise DegreeOfZero("leading coefficient of the zero polynomial")
        return self.c[-1]

    def coeff(self, k: int) -> ConstField:
        return self.c[k] if 0 <= k < len(self.c) else ZERO

    def __add__(self, other):
        other = _as_polyd(other)
        n = max(len(self.c), len(other.c))
        return PolyD._raw(self.coeff(k) + other.coeff(k) for k in range(n))

    __radd__ = __add__

    def __neg__(self):
        return PolyD._raw(-a for a in self.c)

    def __sub__(self, other):
        return self + (-_as_polyd(other))

    def __rsub__(self, other):
        return _as_polyd(other) - self

    def __mul__(self, other):
        if not isinstance(other, PolyD):
            other = ConstField.coerce(other)
            if other.is_zero():
                return PolyD()
            return PolyD._raw(a * other for a in self.c)
        if not self.c or not other.c:
            return PolyD()
        out = [ZERO] * (len(self.c) + len(other.c) - 1)
        for i, a in enumerate(self.c):
            if a.is_zero():
                continue
            for j, b in enumerate(other.c):
                out[i + j] = out[i + j] + a * b
        return PolyD._raw(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = PolyD((1,))
        for _ in range(k):
            out = out * self
        return out

    def scale(self, a) -> "PolyD":
        return self * ConstField.coerce(a)

    def divmod(self, other: "PolyD"):
        if other.is_zero():
            raise DivisionByZero("polynomial division by zero")
        r = list(self.c)
        dq = len(r) - len(other.c)
        if dq < 0:
            return PolyD(), self
        inv = other.lc.inv()
        q = [ZERO] * (dq + 1)
        m = other.deg
        for k in range(dq, -1, -1):
            t = r[k + m] * inv
            q[k] = t
            if t.is_zero():
                continue
            for j, b in enumerate(other.c):
                r[k + j] = r[k + j] - t * b
            r[k + m] = ZERO
        return PolyD._raw(q), PolyD._raw(r[:m] if m > 0 else [])

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def monic(self) -> "PolyD":
        if self.is_zero():
            return self
        lc = self.lc
        if lc.is_one():
            return self
        inv = lc.inv()
        return PolyD._raw(a * inv for a in self.c)

    def gcd(self, other: "PolyD") -> "PolyD":
        if not (self.is_exact() and other.is_exact()):
            if self.is_rational() and not self.is_zero():
                return _root_gcd(other, self)
            if other.is_rational() and not other.is_zero():
                return _root_gcd(self, other)
            return _numeric_gcd(self, other)
        if self.is_rational() != other.is_rational():
            # keep Euclid over the rationals; exponential constants swell quickly
            exp_side, rat_side = (other, self) if self.is_rational() else (self, other)
            g = rat_side
            for comp in _rational_components(exp_side):
                g = g.gcd(comp)
                if g.deg == 0:
                    break
            return g.monic()
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def deriv(self) -> "PolyD":
        return PolyD._raw(a * k for k, a in enumerate(self.c) if k)

    def __call__(self, x):
        x = ConstField.coerce(x)
        out = ZERO
        for a in reversed(self.c):
            out = out * x + a
        return out

    def eval_mp(self, lam):
        out = mpmath.mpf(0)
        for a in reversed(self.c):
            out = out * lam + a.to_mp()
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, ConstField)):
            other = PolyD.const(other)
        if not isinstance(other, PolyD):
            return NotImplemented
        return len(self.c) == len(other.c) and all(a == b for a, b in zip(self.c, other.c))

    __hash__ = None

    def __str__(self):
        if not self.c:
            return "0"
        parts = []
        for k in range(len(self.c) - 1, -1, -1):
            a = self.c[k]
            if a.is_zero():
                continue
            x = "" if k == 0 else ("dt" if k == 1 else f"dt^{k}")
            s = str(a)
            if a.is_rational or (a.is_exact and len(a.num.terms) == 1 and a.den.is_rational()):
                neg = s.startswith("-")
                body = s[1:] if neg else s
                if x and body == "1":
                    body = x
                elif x:
                    body = f"{body}*{x}"
                parts.append(("-" if neg else "") + body)
            else:
                parts.append(f"({s})*{x}" if x else f"({s})")
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return f"PolyD({self})"


def _rational_components(p: PolyD) -> list:
    """Rational polynomials ``P_k`` with ``p = c * sum_k e_k P_k`` for distinct
    exponential monomials ``e_k`` and a nonzero constant ``c``.

    The ``e_k`` are treated as linearly independent over the rationals, as in
    the exact zero test of the constant field.
    """
    dens = []
    for a in p.c:
        if a.q is None and not any(a.den == d for d in dens):
            dens.append(a.den)
    comps: dict = {}
    for k, a in enumerate(p.c):
        num, den = a._num_den()
        for d in dens:
            if d is not den and d != den:
                num = num * d
        for key, q in num.terms.items():
            comps.setdefault(key, {})[k] = q
    return [PolyD([ConstField.rational(c.get(k, 0)) for k in range(len(p.c))]) for c in comps.values()]


def _mp_monic(c):
    inv = 1 / c[-1]
    return [x * inv for x in c[:-1]] + [mpmath.mpf(1)]


def _mp_rem(a, b):
    """Remainder of ascending coefficient lists, ``b`` monic."""
    r = list(a)
    m = len(b) - 1
    for k in range(len(r) - 1 - m, -1, -1):
        t = r[k + m]
        if t:
            for j in range(m):
                r[k + j] -= t * b[j]
        r[k + m] = 0
    return r[:m]


def _root_gcd(a: PolyD, d: PolyD) -> PolyD:
    """gcd of a numeric ``a`` with a rational ``d`` from the vanishing order of
    ``a`` at each root of ``d``; better conditioned than Euclid near multiple roots."""
    from .division import find_roots

    if a.is_zero():
        return d.monic()
    tol = cancel_tol()
    g = P_ONE
    for s, mult in find_roots(d):
        z = s.to_mp()
        cur = [c.to_mp() for c in a.c]
        k = 0
        while k < mult and len(cur) > 1:
            scale = sum(abs(c) * abs(z) ** i for i, c in enumerate(cur))
            quo = [mpmath.mpf(0)] * (len(cur) - 1)
            acc = cur[-1]
            for i in range(len(cur) - 2, -1, -1):
                quo[i] = acc
                acc = acc * z + cur[i]
            if abs(acc) > tol * scale:
                break
            cur = quo
            k += 1
        for _ in range(k):
            g = g * PolyD((-s, 1))
    return g


def _numeric_gcd(a: PolyD, b: PolyD) -> PolyD:
    """Euclid on monic remainders; a remainder below ``eps_root`` relative to
    the operands counts as zero."""
    if a.is_zero():
        return b.monic()
    if b.is_zero():
        return a.monic()
    tol = eps("root")
    x = _mp_monic([c.to_mp() for c in a.c])
    y = _mp_monic([c.to_mp() for c in b.c])
    if len(x) < len(y):
        x, y = y, x
    while len(y) > 1:
        r = _mp_rem(x, y)
        size = max(max(abs(v) for v in x), max(abs(v) for v in y))
        while r and abs(r[-1]) <= tol * size:
            r.pop()
        if not r or max(abs(v) for v in r) <= tol * size:
            return PolyD([ConstField.numeric(v) for v in y]).monic()
        x, y = y, _mp_monic(r)
    return P_ONE


def _as_polyd(x) -> PolyD:
    return x if isinstance(x, PolyD) else PolyD.const(x)


DT = PolyD((0, 1))
P_ONE = PolyD((1,))


class RatD:
    """Reduced rational function num(dt)/den(dt) with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, *, reduce: bool = True):
        num = _as_polyd(num)
        den = P_ONE if den is None else _as_polyd(den)
        if den.is_zero():
            raise DivisionByZero("rational function with zero denominator")
        if reduce:
            num, den = _reduce(num, den)
        self.num = num
        self.den = den

    @classmethod
    def const(cls, a) -> "RatD":
        return cls(PolyD.const(a), P_ONE, reduce=False)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.deg == 0

    def is_const(self) -> bool:
        return self.den.deg == 0 and self.num.deg <= 0

    def is_exact(self) -> bool:
        return self.num.is_exact() and self.den.is_exact()

    @property
    def deg(self) -> int:
        if self.num.is_zero():
            raise DegreeOfZero("degree of the zero coefficient")
        return self.num.deg - self.den.deg

    @property
    def lc(self) -> ConstField:
        """Coefficient of dt**deg in the expansion at infinity."""
        return self.num.lc / self.den.lc

    def is_proper(self) -> bool:
        return self.is_zero() or self.deg <= 0

    def __add__(self, other):
        other = _as_ratd(other)
        if self.den == other.den:
            return RatD(self.num + other.num, self.den)
        return RatD(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatD(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        return self + (-_as_ratd(other))

    def __rsub__(self, other):
        return _as_ratd(other) - self

    def __mul__(self, other):
        other = _as_ratd(other)
        if self.is_zero() or other.is_zero():
            return RatD(PolyD())
        if self.den.deg == 0 and other.den.deg == 0:
            return RatD(self.num * other.num, P_ONE, reduce=False)
        # a constant factor cannot create common factors
        if other.den.deg == 0 and other.num.deg == 0:
            return RatD(self.num * other.num.c[0], self.den, reduce=False)
        if self.den.deg == 0 and self.num.deg == 0:
            return RatD(other.num * self.num.c[0], other.den, reduce=False)
        return RatD(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inv(self) -> "RatD":
        if self.is_zero():
            raise DivisionByZero("inverse of zero coefficient")
        return RatD(self.den, self.num)

    def __truediv__(self, other):
        return self * _as_ratd(other).inv()

    def __rtruediv__(self, other):
        return _as_ratd(other) * self.inv()

    def __pow__(self, k: int):
        if k < 0:
            return self.inv() ** (-k)
        return RatD(self.num ** k, self.den ** k, reduce=False)

    def eval_mp(self, lam):
        return self.num.eval_mp(lam) / self.den.eval_mp(lam)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, ConstField, PolyD)):
            other = _as_ratd(other)
        if not isinstance(other, RatD):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    __hash__ = None

    def perturbed(self, rel) -> "RatD":
        k = self.num.deg
        c = list(self.num.c)
        c[k] = c[k].perturbed(rel)
        return RatD(PolyD(c), self.den, reduce=False)

    def __str__(self):
        if self.den.deg == 0:
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self):
        return f"RatD({self})"


def _as_ratd(x) -> RatD:
    if isinstance(x, RatD):
        return x
    if isinstance(x, PolyD):
        return RatD(x, P_ONE, reduce=False)
    return RatD.const(x)


def _reduce(num: PolyD, den: PolyD):
    if num.is_zero():
        return PolyD(), P_ONE
    if den.deg == 0:
        if not den.c[0].is_one():
            num = num * den.c[0].inv()
        return num, P_ONE
    g = num.gcd(den)
    if g.deg > 0:
        num, den = num // g, den // g
    lc = den.lc
    if not lc.is_one():
        inv = lc.inv()
        num, den = num * inv, den * inv
    return num, den


R_ZERO = RatD(PolyD())
R_ONE = RatD(P_ONE)


def _coerce_coeff(a) -> RatD:
    return _as_ratd(a)


def _merge_basis(a, b):
    if a is None:
        return b
    if b is None or a == b:
        return a
    raise DomainError(f"basis mismatch: {a!r} vs {b!r}")


class GPoly:
    """Sum of terms ``coeff(dt) * sigma**exponent``, descending exponents."""

    __slots__ = ("terms", "basis")

    def __init__(self, terms: Iterable = (), basis: DelayBasis | None = None):
        self.terms = _normalize(terms)
        self.basis = basis

    @classmethod
    def _sorted(cls, terms, basis):
        g = cls.__new__(cls)
        g.terms = tuple(terms)
        g.basis = basis
        return g

    @classmethod
    def monomial(cls, exponent: Exponent, coeff=1, basis=None) -> "GPoly":
        return cls([(exponent, coeff)], basis)

    @classmethod
    def const(cls, coeff, basis=None) -> "GPoly":
        return cls([(ZERO_EXP, coeff)], basis)

    @classmethod
    def zero(cls, basis=None) -> "GPoly":
        return cls._sorted((), basis)

    def with_basis(self, basis) -> "GPoly":
        return GPoly._sorted(self.terms, basis)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    # degrees --------------------------------------------------------------
    def _need_nonzero(self):
        if not self.terms:
            raise DegreeOfZero("degree of the zero generalized polynomial")

    @property
    def deg_plus(self) -> Exponent:
        self._need_nonzero()
        return self.terms[0][0]

    @property
    def deg_minus(self) -> Exponent:
        self._need_nonzero()
        return self.terms[-1][0]

    @property
    def deg_sigma(self) -> Exponent:
        return self.deg_plus - self.deg_minus

    @property
    def deg_dt(self) -> int:
        self._need_nonzero()
        return max(c.deg for _, c in self.terms)

    @property
    def leading(self):
        self._need_nonzero()
        return self.terms[0]

    @property
    def trailing(self):
        self._need_nonzero()
        return self.terms[-1]

    def coeff_at(self, exponent: Exponent) -> RatD:
        for e, c in self.terms:
            if compare(e, exponent) == 0:
                return c
        return R_ZERO

    def is_polynomial(self) -> bool:
        return all(c.is_poly() for _, c in self.terms)

    def is_exact(self) -> bool:
        return all(c.is_exact() for _, c in self.terms)

    def as_polynomial(self) -> "GPoly":
        """Cast to the polynomial-coefficient subring; fails on real denominators."""
        for e, c in self.terms:
            if not c.is_poly():
                raise DomainError(f"coefficient {c} of sigma^({e}) has a non-constant denominator")
        return self

    def is_proper(self) -> bool:
        return all(c.is_proper() for _, c in self.terms)

    def common_denominator(self) -> PolyD:
        d = P_ONE
        for _, c in self.terms:
            if c.den.deg > 0:
                d = d * (c.den // d.gcd(c.den))
        return d.monic()

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        other = _as_gpoly(other)
        return GPoly(self.terms + other.terms, _merge_basis(self.basis, other.basis))

    __radd__ = __add__

    def __neg__(self):
        return GPoly._sorted(((e, -c) for e, c in self.terms), self.basis)

    def __sub__(self, other):
        return self + (-_as_gpoly(other))

    def __rsub__(self, other):
        return _as_gpoly(other) - self

    def __mul__(self, other):
        if isinstance(other, GPoly):
            basis = _merge_basis(self.basis, other.basis)
            return GPoly(
                [(e1 + e2, c1 * c2) for e1, c1 in self.terms for e2, c2 in other.terms], basis
            )
        c = _coerce_coeff(other)
        if c.is_zero():
            return GPoly.zero(self.basis)
        return GPoly._sorted(((e, a * c) for e, a in self.terms), self.basis)

    __rmul__ = __mul__

    def shift(self, exponent: Exponent) -> "GPoly":
        """Multiply by sigma**exponent."""
        return GPoly._sorted(((e + exponent, c) for e, c in self.terms), self.basis)

    def __eq__(self, other):
        if not isinstance(other, GPoly):
            try:
                other = _as_gpoly(other)
            except TypeError:
                return NotImplemented
        if len(self.terms) != len(other.terms):
            return False
        return all(
            compare(e1, e2) == 0 and c1 == c2
            for (e1, c1), (e2, c2) in zip(self.terms, other.terms)
        )

    __hash__ = None

    def formal_equal(self, other: "GPoly") -> bool:
        """Equality with exponents compared by their formal rational vectors."""
        return len(self.terms) == len(other.terms) and all(
            e1 == e2 and c1 == c2 for (e1, c1), (e2, c2) in zip(self.terms, other.terms)
        )

    def symbol(self, lam):
        """Laplace symbol sum a_i(lam) * exp(lam * alpha_i) at complex ``lam``."""
        return mpmath.fsum(c.eval_mp(lam) * mpmath.exp(lam * e.value) for e, c in self.terms)

    def map_coeffs(self, fn) -> "GPoly":
        return GPoly(((e, fn(c)) for e, c in self.terms), self.basis)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            s = str(c)
            if c.is_poly() and len(c.num.c) - sum(a.is_zero() for a in c.num.c) == 1:
                body = s
            else:
                body = f"({s})"
            if e:
                parts.append(f"{body}*sigma^({e})" if body != "1" else f"sigma^({e})")
            else:
                parts.append(body)
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return f"GPoly({self})"


def _as_gpoly(x) -> GPoly:
    if isinstance(x, GPoly):
        return x
    return GPoly.const(_coerce_coeff(x))


def _normalize(terms) -> tuple:
    items = []
    for e, c in terms:
        if not isinstance(e, Exponent):
            raise TypeError(f"exponent must be an Exponent, got {type(e).__name__}")
        c = _coerce_coeff(c)
        if not c.is_zero():
            items.append((e, c))
    if not items:
        return ()
    items.sort(key=lambda t: t[0].value, reverse=True)
    out = [items[0]]
    for e, c in items[1:]:
        e0, c0 = out[-1]
        if compare(e0, e) == 0:
            if e0 != e:
                warnings.warn(
                    f"exponents {e0} and {e} are numerically equal; merged", ExponentMergeWarning
                )
            out[-1] = (e0, c0 + c)
        else:
            out.append((e, c))
    return tuple((e, c) for e, c in out if not c.is_zero())


def gp_normalize(terms, basis: DelayBasis | None = None) -> GPoly:
    return GPoly(terms, basis)


def gp_add(x: GPoly, y: GPoly) -> GPoly:
    return x + y


def gp_mul(x: GPoly, y: GPoly) -> GPoly:
    return x * y


def gp_degrees(x: GPoly):
    """``(deg_plus, deg_minus, deg_sigma, deg_dt)`` of a nonzero GPoly."""
    return x.deg_plus, x.deg_minus, x.deg_sigma, x.deg_dt


def ratd(num, den=None) -> RatD:
    """Shorthand: ``ratd([0, 2, 1])`` is dt^2 + 2*dt; lists are ascending."""
    n = PolyD(num) if isinstance(num, (list, tuple)) else _as_polyd(num)
    d = None if den is None else (PolyD(den) if isinstance(den, (list, tuple)) else _as_polyd(den))
    return RatD(n, d)
