"""Exact scalars: shift exponents and the field of exponential sums.

Shift exponents are rational combinations of named delays plus a rational
offset.  Constants produced by the entire correction live in the field
generated by ``exp(exponent)`` and polynomials in the delay symbols, e.g.
``16*exp(6*pi - 20)``.  When a denominator has irrational roots the
computation falls back to high-precision floating values (numeric mode).
"""

from __future__ import annotations

import ast
import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

import mpmath
from mpmath import mp

from .errors import DivisionByZero, DomainError

Rational = Union[int, Fraction]


@dataclass
class Settings:
    precision: int = 50
    guard: int = 20
    eps_exp: str = "1e-25"
    eps_entire: str = "1e-20"
    eps_root: str = "1e-30"
    eps_oracle: str = "1e-20"
    # expression-swell guard for the shift reduction
    max_den_degree: int = 32


settings = Settings()


def set_precision(digits: int) -> None:
    settings.precision = int(digits)
    mp.dps = settings.precision + settings.guard


def working_dps() -> int:
    return settings.precision + settings.guard


def eps(name: str) -> mpmath.mpf:
    return _eps_value(getattr(settings, "eps_" + name), mp.dps)


def cancel_tol() -> mpmath.mpf:
    """Relative size below which a numeric result counts as an exact zero
    (cancelled sums, common factors); tied to the working precision."""
    return _eps_value("1e-%d" % (settings.precision + settings.guard // 2), mp.dps)


@lru_cache(maxsize=64)
def _eps_value(text: str, dps: int) -> mpmath.mpf:
    return mpmath.mpf(text)


set_precision(settings.precision)


NAMED_CONSTANTS = {
    "pi": lambda: +mp.pi,
    "e": lambda: +mp.e,
}


@lru_cache(maxsize=None)
def _spec_value(spec: str, dps: int) -> mpmath.mpf:
    with mpmath.workdps(dps):
        if spec in NAMED_CONSTANTS:
            return NAMED_CONSTANTS[spec]()
        if "/" in spec:
            f = Fraction(spec)
            return mpmath.mpf(f.numerator) / f.denominator
        return mpmath.mpf(spec)


def _exp_dps() -> int:
    return working_dps() + 30


@dataclass(frozen=True)
class Symbol:
    """A named delay.  ``spec`` is a named constant, a rational or a decimal."""

    name: str
    spec: str

    def __post_init__(self):
        if not self.name.isidentifier() or self.name in ("exp", "num", "dt", "s"):
            raise DomainError(f"invalid delay name {self.name!r}")
        try:
            v = _spec_value(self.spec, 30)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot read value {self.spec!r} of delay {self.name}") from exc
        if not v > 0:
            raise DomainError(f"delay {self.name} must be positive, got {self.spec}")

    def value(self, dps: int | None = None) -> mpmath.mpf:
        return _spec_value(self.spec, dps or _exp_dps())


class DelayBasis:
    """Ordered set of named delays shared by all exponents of one problem."""

    __slots__ = ("symbols", "_by_name")

    def __init__(self, entries: Iterable[Symbol] | Mapping[str, str] = ()):
        if isinstance(entries, Mapping):
            entries = [Symbol(k, str(v)) for k, v in entries.items()]
        self.symbols = tuple(entries)
        self._by_name = {s.name: s for s in self.symbols}
        if len(self._by_name) != len(self.symbols):
            raise DomainError("delay names must be unique")

    @property
    def names(self):
        return tuple(s.name for s in self.symbols)

    def __getitem__(self, name: str) -> "Exponent":
        try:
            return Exponent.symbol(self._by_name[name])
        except KeyError:
            raise DomainError(f"unknown delay {name!r}") from None

    def __contains__(self, sym) -> bool:
        if isinstance(sym, Symbol):
            return self._by_name.get(sym.name) == sym
        return sym in self._by_name

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __eq__(self, other):
        return isinstance(other, DelayBasis) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        return "DelayBasis(%s)" % ", ".join(f"{s.name}={s.spec}" for s in self.symbols)

    def merged(self, other: "DelayBasis") -> "DelayBasis":
        out = list(self.symbols)
        for s in other.symbols:
            if s.name in self._by_name:
                if self._by_name[s.name] != s:
                    raise DomainError(f"delay {s.name} defined twice with different values")
            else:
                out.append(s)
        return DelayBasis(out)

    def to_dict(self) -> dict:
        return {s.name: s.spec for s in self.symbols}

    def exponent(self, text: str) -> "Exponent":
        return parse_exponent(text, self)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected a rational, got {type(x).__name__}")


class Exponent:
    """Real shift exponent ``sum(c_k * tau_k) + offset`` with rational c_k."""

    __slots__ = ("terms", "offset", "_hash", "_val")

    def __init__(self, terms: Iterable[tuple[Symbol, Rational]] = (), offset: Rational = 0):
        acc: dict[Symbol, Fraction] = {}
        for sym, c in terms:
            acc[sym] = acc.get(sym, Fraction(0)) + _frac(c)
        self.terms = tuple(sorted(((s, c) for s, c in acc.items() if c), key=lambda t: t[0].name))
        self.offset = _frac(offset)
        self._hash = hash((self.terms, self.offset))
        self._val = None

    @classmethod
    def symbol(cls, sym: Symbol) -> "Exponent":
        return cls(((sym, 1),))

    @classmethod
    def const(cls, q: Rational) -> "Exponent":
        return cls((), q)

    @property
    def symbols(self):
        return tuple(s for s, _ in self.terms)

    def is_rational(self) -> bool:
        return not self.terms

    @property
    def value(self) -> mpmath.mpf:
        dps = _exp_dps()
        if self._val is None or self._val[0] < dps:
            with mpmath.workdps(dps):
                v = mpmath.mpf(self.offset.numerator) / self.offset.denominator
                for s, c in self.terms:
                    v += s.value(dps) * c.numerator / c.denominator
            self._val = (dps, v)
        return self._val[1]

    def __eq__(self, other):
        if not isinstance(other, Exponent):
            return NotImplemented
        return self.terms == other.terms and self.offset == other.offset

    def __hash__(self):
        return self._hash

    def __add__(self, other):
        if not isinstance(other, Exponent):
            other = Exponent.const(_frac(other))
        return Exponent(self.terms + other.terms, self.offset + other.offset)

    __radd__ = __add__

    def __neg__(self):
        return Exponent(((s, -c) for s, c in self.terms), -self.offset)

    def __sub__(self, other):
        if not isinstance(other, Exponent):
            other = Exponent.const(_frac(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, q):
        q = _frac(q)
        return Exponent(((s, c * q) for s, c in self.terms), self.offset * q)

    __rmul__ = __mul__

    def __truediv__(self, q):
        q = _frac(q)
        if q == 0:
            raise DivisionByZero("exponent divided by zero")
        return self * (1 / q)

    def __bool__(self):
        return bool(self.terms) or bool(self.offset)

    def __str__(self):
        parts = []
        if self.offset:
            parts.append(str(self.offset))
        for s, c in self.terms:
            if c == 1:
                t = s.name
            elif c == -1:
                t = "-" + s.name
            elif c.denominator == 1:
                t = f"{c.numerator}*{s.name}"
            elif abs(c.numerator) == 1:
                t = ("-" if c < 0 else "") + f"{s.name}/{c.denominator}"
            else:
                t = f"{c.numerator}/{c.denominator}*{s.name}"
            parts.append(t)
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return f"Exponent({self})"


ZERO_EXP = Exponent()


class Ordering(enum.Enum):
    LT = -1
    EQ = 0
    GT = 1


def compare(a: Exponent, b: Exponent) -> int:
    """Three-way numeric comparison; exact formal equality short-circuits."""
    if a == b:
        return 0
    with mpmath.workdps(_exp_dps()):
        d = a.value - b.value
        if abs(d) <= eps("exp"):
            return 0
    return 1 if d > 0 else -1


def exponent_compare(a: Exponent, b: Exponent, basis: DelayBasis | None = None) -> Ordering:
    if basis is not None:
        for s in a.symbols + b.symbols:
            if s not in basis:
                raise DomainError(f"delay {s.name} is not part of {basis!r}")
    return Ordering(compare(a, b))


# --- monomials in the delay symbols ---------------------------------------

Monomial = tuple  # tuple[(Symbol, int)], sorted by name


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    acc = dict(a)
    for s, k in b:
        acc[s] = acc.get(s, 0) + k
    return tuple(sorted(acc.items(), key=lambda t: t[0].name))


def mono_value(m: Monomial) -> mpmath.mpf:
    v = mpmath.mpf(1)
    for s, k in m:
        v *= s.value() ** k
    return v


def mono_str(m: Monomial) -> str:
    return "*".join(s.name if k == 1 else f"{s.name}**{k}" for s, k in m)


class ExpConst:
    """Finite sum of ``q * monomial * exp(exponent)`` with rational q."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[Exponent, Monomial], Fraction] | None = None):
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def rational(cls, q: Rational) -> "ExpConst":
        return cls({(ZERO_EXP, ()): _frac(q)})

    @classmethod
    def exp(cls, ell: Exponent, q: Rational = 1) -> "ExpConst":
        return cls({(ell, ()): _frac(q)})

    @classmethod
    def from_exponent(cls, ell: Exponent) -> "ExpConst":
        """The real number ``ell`` itself, as a polynomial in the delays."""
        terms = {(ZERO_EXP, ((s, 1),)): c for s, c in ell.terms}
        if ell.offset:
            terms[(ZERO_EXP, ())] = ell.offset
        return cls(terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_rational(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and (ZERO_EXP, ()) in self.terms)

    def rational_value(self) -> Fraction:
        return self.terms.get((ZERO_EXP, ()), Fraction(0))

    def __add__(self, other: "ExpConst") -> "ExpConst":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return ExpConst(out)

    def __neg__(self):
        return ExpConst({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "ExpConst") -> "ExpConst":
        out: dict = {}
        for (e1, m1), v1 in self.terms.items():
            for (e2, m2), v2 in other.terms.items():
                k = (e1 + e2, mono_mul(m1, m2))
                out[k] = out.get(k, 0) + v1 * v2
        return ExpConst(out)

    def scale(self, q: Rational) -> "ExpConst":
        q = _frac(q)
        return ExpConst({k: v * q for k, v in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, ExpConst) and self.terms == other.terms

    __hash__ = None

    def term_values(self):
        for (e, m), q in self.terms.items():
            yield (e, m, q), mpmath.mpf(q.numerator) / q.denominator * mono_value(m) * mpmath.exp(e.value)

    def eval(self) -> mpmath.mpf:
        return mpmath.fsum(v for _, v in self.term_values())

    def __str__(self):
        if not self.terms:
            return "0"
        items = sorted(self.terms.items(), key=lambda kv: (-kv[0][0].value, mono_str(kv[0][1])))
        parts = []
        for (e, m), q in items:
            factors = []
            if m:
                factors.append(mono_str(m))
            if e:
                factors.append(f"exp({e})")
            if not factors:
                parts.append(str(q))
                continue
            body = "*".join(factors)
            if q == 1:
                parts.append(body)
            elif q == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{q}*{body}")
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out


def exp_const_eval(c: ExpConst, basis: DelayBasis | None = None) -> mpmath.mpf:
    """High-precision value of an exponential sum."""
    return c.eval()


_ONE_EXP = ExpConst.rational(1)


def _rational_ratio(num: ExpConst, den: ExpConst) -> Fraction | None:
    if num.terms.keys() != den.terms.keys():
        return None
    ratios = {num.terms[k] / den.terms[k] for k in num.terms}
    return ratios.pop() if len(ratios) == 1 else None


def _to_mp(v) -> mpmath.mpc:
    return v if isinstance(v, (mpmath.mpf, mpmath.mpc)) else mpmath.mpmathify(v)


class ConstField:
    """Element of the constant field: exact rational, exact exponential
    fraction ``num/den``, or a numeric (high-precision complex) value."""

    __slots__ = ("q", "num", "den", "v", "_cache")

    def __init__(self, q=None, num=None, den=None, v=None):
        self.q = q
        self.num = num
        self.den = den
        self.v = v
        self._cache = None

    # construction ---------------------------------------------------------
    @classmethod
    def rational(cls, q: Rational) -> "ConstField":
        return cls(q=_frac(q))

    @classmethod
    def exp(cls, ell: Exponent, q: Rational = 1) -> "ConstField":
        return cls.from_expconst(ExpConst.exp(ell, q))

    @classmethod
    def from_exponent(cls, ell: Exponent) -> "ConstField":
        return cls.from_expconst(ExpConst.from_exponent(ell))

    @classmethod
    def from_expconst(cls, num: ExpConst, den: ExpConst | None = None) -> "ConstField":
        den = _ONE_EXP if den is None else den
        if den.is_zero():
            raise DivisionByZero("zero denominator in constant")
        if num.is_zero():
            return cls(q=Fraction(0))
        if len(den.terms) == 1:
            (e, m), c = next(iter(den.terms.items()))
            if not m:
                num = num * ExpConst.exp(-e, 1 / c) if e else num.scale(1 / c)
                den = _ONE_EXP
        else:
            # den normalised so that its numerically largest term has coefficient 1
            (key, _) = max(den.term_values(), key=lambda kv: abs(kv[1]))
            e, m, c = key
            k = ExpConst.exp(-e, 1 / c)
            num, den = num * k, den * k
        if den.is_rational() and num.is_rational():
            return cls(q=num.rational_value() / den.rational_value())
        ratio = _rational_ratio(num, den)
        if ratio is not None:
            return cls(q=ratio)
        return cls(num=num, den=den)

    @classmethod
    def numeric(cls, v) -> "ConstField":
        v = _to_mp(v)
        if isinstance(v, mpmath.mpc):
            tiny = cancel_tol() * abs(v)
            if abs(v.imag) <= tiny:
                v = mpmath.mpf(v.real)
            elif abs(v.real) <= tiny:
                v = mpmath.mpc(0, v.imag)
        if v == 0:
            return cls(q=Fraction(0))
        return cls(v=v)

    @classmethod
    def coerce(cls, x) -> "ConstField":
        if isinstance(x, ConstField):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(q=Fraction(x))
        if isinstance(x, ExpConst):
            return cls.from_expconst(x)
        if isinstance(x, (mpmath.mpf, mpmath.mpc, float, complex)):
            return cls.numeric(x)
        raise TypeError(f"cannot convert {type(x).__name__} to ConstField")

    # predicates -----------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.q is not None

    @property
    def is_numeric(self) -> bool:
        return self.v is not None

    @property
    def is_exact(self) -> bool:
        return self.v is None

    def is_zero(self) -> bool:
        return self.q is not None and self.q == 0

    def is_one(self) -> bool:
        return self.q is not None and self.q == 1

    def __bool__(self):
        return not self.is_zero()

    # numeric value ----------------------------------------------------------
    def to_mp(self):
        dps = mp.dps
        if self._cache is not None and self._cache[0] >= dps:
            return self._cache[1]
        if self.q is not None:
            val = mpmath.mpf(self.q.numerator) / self.q.denominator
        elif self.v is not None:
            val = self.v
        else:
            val = self.num.eval() / self.den.eval()
        self._cache = (dps, val)
        return val

    def _num_den(self):
        if self.q is not None:
            return ExpConst.rational(self.q), _ONE_EXP
        return self.num, self.den

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        other = ConstField.coerce(other)
        if self.q is not None and other.q is not None:
            return ConstField(q=self.q + other.q)
        if self.v is not None or other.v is not None:
            a, b = self.to_mp(), other.to_mp()
            s = a + b
            if abs(s) <= cancel_tol() * max(abs(a), abs(b)):
                return ConstField(q=Fraction(0))
            return ConstField.numeric(s)
        n1, d1 = self._num_den()
        n2, d2 = other._num_den()
        if d1 == d2:
            return ConstField.from_expconst(n1 + n2, d1)
        return ConstField.from_expconst(n1 * d2 + n2 * d1, d1 * d2)

    __radd__ = __add__

    def __neg__(self):
        if self.q is not None:
            return ConstField(q=-self.q)
        if self.v is not None:
            return ConstField(v=-self.v)
        return ConstField(num=-self.num, den=self.den)

    def __sub__(self, other):
        return self + (-ConstField.coerce(other))

    def __rsub__(self, other):
        return ConstField.coerce(other) - self

    def __mul__(self, other):
        other = ConstField.coerce(other)
        if self.q is not None and other.q is not None:
            return ConstField(q=self.q * other.q)
        if self.is_zero() or other.is_zero():
            return ConstField(q=Fraction(0))
        if self.v is not None or other.v is not None:
            return ConstField.numeric(self.to_mp() * other.to_mp())
        if self.q is not None:
            return ConstField(num=other.num.scale(self.q), den=other.den)
        if other.q is not None:
            return ConstField(num=self.num.scale(other.q), den=self.den)
        n1, d1 = self._num_den()
        n2, d2 = other._num_den()
        return ConstField.from_expconst(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def inv(self) -> "ConstField":
        if self.is_zero():
            raise DivisionByZero("inverse of zero constant")
        if self.q is not None:
            return ConstField(q=1 / self.q)
        if self.v is not None:
            return ConstField.numeric(1 / self.v)
        return ConstField.from_expconst(self.den, self.num)

    def __truediv__(self, other):
        return self * ConstField.coerce(other).inv()

    def __rtruediv__(self, other):
        return ConstField.coerce(other) * self.inv()

    def __pow__(self, k: int):
        if k < 0:
            return self.inv() ** (-k)
        out = ConstField(q=Fraction(1))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        try:
            other = ConstField.coerce(other)
        except TypeError:
            return NotImplemented
        if self.q is not None and other.q is not None:
            return self.q == other.q
        return (self - other).is_zero()

    __hash__ = None

    def perturbed(self, rel) -> "ConstField":
        """Copy multiplied by ``1 + rel`` (used for fault injection)."""
        return self * (1 + _frac(rel))

    def __str__(self):
        if self.q is not None:
            return str(self.q)
        if self.v is not None:
            v = _to_mp(self.v)
            re = mpmath.nstr(mpmath.re(v), working_dps(), min_fixed=1, max_fixed=0)
            im = mpmath.im(v)
            if im == 0:
                return f'num("{re}")'
            return f'num("{re}", "{mpmath.nstr(im, working_dps(), min_fixed=1, max_fixed=0)}")'
        n, d = str(self.num), str(self.den)
        if d == "1":
            return n
        return f"({n})/({d})"

    def __repr__(self):
        return f"ConstField({self})"


ZERO = ConstField.rational(0)
ONE = ConstField.rational(1)


def const_field_arith(op: str, x: ConstField, y: ConstField | None = None) -> ConstField:
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "inv":
        return x.inv()
    raise DomainError(f"unknown operation {op!r}")


# --- parsing -------------------------------------------------------------------

_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)


def _literal(node) -> Fraction:
    if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
        raise DomainError(f"unsupported literal {node.value!r}")
    return Fraction(str(node.value))


def parse_exponent(text: str, basis: DelayBasis) -> Exponent:
    """Parse a linear expression such as ``"10 - 3*pi"`` into an Exponent."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant):
            return Exponent.const(_literal(node))
        if isinstance(node, ast.Name):
            return basis[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and isinstance(node.op, _BINOPS):
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                if a.is_rational():
                    return b * a.offset
                if b.is_rational():
                    return a * b.offset
                raise DomainError(f"non-linear exponent {text!r}")
            if isinstance(node.op, ast.Div) and b.is_rational():
                return a / b.offset
        raise DomainError(f"cannot parse exponent {text!r}")

    try:
        tree = ast.parse(str(text).strip(), mode="eval")
    except SyntaxError as exc:
        raise DomainError(f"cannot parse exponent {text!r}") from exc
    return ev(tree)


def parse_const(text: str, basis: DelayBasis) -> ConstField:
    """Parse the textual form produced by ``str(ConstField)``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant):
            return ConstField.rational(_literal(node))
        if isinstance(node, ast.Name):
            return ConstField.from_exponent(basis[node.id])
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
            if node.func.id == "exp" and len(node.args) == 1:
                return ConstField.exp(parse_exponent(ast.unparse(node.args[0]), basis))
            if node.func.id == "num" and 1 <= len(node.args) <= 2:
                parts = [a.value for a in node.args if isinstance(a, ast.Constant)]
                if len(parts) == len(node.args) and all(isinstance(p, str) for p in parts):
                    re = mpmath.mpf(parts[0])
                    im = mpmath.mpf(parts[1]) if len(parts) == 2 else 0
                    return ConstField.numeric(mpmath.mpc(re, im) if im else re)
        if isinstance(node, ast.BinOp) and isinstance(node.op, _BINOPS):
            if isinstance(node.op, ast.Pow):
                if isinstance(node.right, ast.Constant) and isinstance(node.right.value, int):
                    return ev(node.left) ** node.right.value
                raise DomainError(f"non-integer power in {text!r}")
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            return a / b
        raise DomainError(f"cannot parse constant {text!r}")

    try:
        tree = ast.parse(str(text).strip(), mode="eval")
    except SyntaxError as exc:
        raise DomainError(f"cannot parse constant {text!r}") from exc
    return ev(tree)
