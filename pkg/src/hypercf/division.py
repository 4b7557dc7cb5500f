"""Long division of generalized polynomials and the entire correction.

``gpld`` removes predictions beyond the divisor's range by dividing leading
terms, then delays by dividing trailing terms.  ``make_entire`` adds a pure
``p(dt)`` to the quotient so that its Laplace symbol has no poles, which makes
the quotient a compactly supported convolution operator.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import (
    DivisionByZero,
    EntiretyCheckFailed,
    NumericFallbackWarning,
    PreconditionViolated,
    ReductionDiverged,
)
from .gpoly import GPoly, P_ONE, PolyD, RatD, R_ZERO
from .oracle import EntireReport, check_entire
from .scalars import ONE, ZERO, ConstField, Exponent, ZERO_EXP, compare, eps, settings, working_dps

MAX_STEPS = 10_000


@dataclass
class DivisionResult:
    x: GPoly
    y: GPoly
    q: GPoly
    r: GPoly
    common_den: PolyD  # monic lcm of the quotient's coefficient denominators
    raw_den: PolyD  # b_1**k_plus * b_m**k_minus (numerators, monic)
    k_plus: int
    k_minus: int


def _swell(r: GPoly, limit):
    if limit is not None:
        worst = max((c.den.deg for _, c in r.terms), default=0)
        if worst > limit:
            raise ReductionDiverged(f"remainder denominator of degree {worst} exceeds the limit {limit}")


def gpld(x: GPoly, y: GPoly, *, check: bool = True, max_den_degree: int | None = None) -> DivisionResult:
    """Divide ``x`` by ``y`` so that ``x = q*y + r``.

    Leading-term quotients are taken until ``deg_plus r < deg_plus y``, then
    trailing-term quotients until ``deg_minus r >= deg_minus y``.  With
    ``max_den_degree`` set, coefficient growth beyond that degree raises
    ReductionDiverged.
    """
    if y.is_zero():
        raise DivisionByZero("generalized division by the zero polynomial")
    if check and not x.is_zero() and compare(x.deg_sigma, y.deg_sigma) < 0:
        raise PreconditionViolated(f"deg_sigma x = {x.deg_sigma} < deg_sigma y = {y.deg_sigma}")
    top_e, top_c = y.leading
    bot_e, bot_c = y.trailing
    top_inv, bot_inv = top_c.inv(), bot_c.inv()
    basis = x.basis or y.basis
    r = x
    q_terms = []
    k_plus = k_minus = 0
    while r and compare(r.deg_plus, top_e) >= 0:
        e, c = r.leading
        t_e, t_c = e - top_e, c * top_inv
        q_terms.append((t_e, t_c))
        r = r - y.shift(t_e) * t_c
        _swell(r, max_den_degree)
        k_plus += 1
        if k_plus > MAX_STEPS:
            raise PreconditionViolated("upper division branch does not terminate")
    while r and compare(r.deg_minus, bot_e) < 0:
        e, c = r.trailing
        t_e, t_c = e - bot_e, c * bot_inv
        q_terms.append((t_e, t_c))
        r = r - y.shift(t_e) * t_c
        _swell(r, max_den_degree)
        k_minus += 1
        if k_minus > MAX_STEPS:
            raise PreconditionViolated("lower division branch does not terminate")
    q = GPoly(q_terms, basis)
    raw = (top_c ** k_plus * bot_c ** k_minus).num.monic()
    return DivisionResult(x, y, q, r.with_basis(basis), q.common_denominator(), raw, k_plus, k_minus)


# --- roots ------------------------------------------------------------------


def _squarefree(d: PolyD):
    """Yun's algorithm: list of (factor, multiplicity) with monic factors."""
    d = d.monic()
    out = []
    a = d.gcd(d.deriv())
    b = d // a
    c = d.deriv() // a
    i = 1
    while b.deg > 0:
        dd = c - b.deriv()
        g = b.gcd(dd)
        if g.deg > 0:
            out.append((g, i))
        b = b // g
        c = dd // g
        i += 1
    return out


def _numeric_roots(f: PolyD):
    """Root estimates; callers validate multiplicities themselves.

    Multiple roots are only determined to about eps**(1/m), so the full
    precision target of polyroots may be out of reach. The fallback iterates
    towards a looser target and leaves refinement to the caller.
    """
    coeffs = [a.to_mp() for a in reversed(f.c)]
    dps = working_dps()
    for steps in (100, 400):
        try:
            return mpmath.polyroots(coeffs, maxsteps=steps, extraprec=2 * dps)
        except mpmath.libmp.NoConvergence:
            continue
    try:
        with mpmath.workdps(max(dps // 4, 15)):
            return mpmath.polyroots(coeffs, maxsteps=2000, extraprec=4 * dps)
    except mpmath.libmp.NoConvergence:
        raise PreconditionViolated(f"no convergence finding roots of {f}") from None


def _refine(c, z, m, steps=30):
    """Newton iteration on the (m-1)-th derivative, where a root of order m is simple."""
    cur = list(c)
    for _ in range(m - 1):
        cur = [k * a for k, a in enumerate(cur)][1:]
    rev = cur[::-1]
    drev = [k * a for k, a in enumerate(cur)][1:][::-1]
    for _ in range(steps):
        dv = mpmath.polyval(drev, z)
        if dv == 0:
            break
        step = mpmath.polyval(rev, z) / dv
        z = z - step
        if abs(step) <= mpmath.mpf(10) ** (-working_dps()) * (1 + abs(z)):
            break
    return z


def _synthetic_division(c, z):
    """Quotient and remainder of ascending coefficients ``c`` by ``(x - z)``."""
    quo = [mpmath.mpf(0)] * (len(c) - 1)
    acc = c[-1]
    for i in range(len(c) - 2, -1, -1):
        quo[i] = acc
        acc = acc * z + c[i]
    return quo, acc


def _is_root_of_order(c, z, m) -> bool:
    """``c`` (ascending mp coefficients) vanishes to order ``m`` at ``z``."""
    tol = eps("root")
    cur = list(c)
    az = abs(z)
    for _ in range(m):
        scale = mpmath.fsum(abs(a) * az**k for k, a in enumerate(cur))
        val = mpmath.polyval(cur[::-1], z)
        if abs(val) > tol * scale:
            return False
        cur = [k * a for k, a in enumerate(cur)][1:]
    return True


def _clustered_roots(d: PolyD):
    """Roots of a numeric polynomial with multiplicities.

    Multiple roots of numeric data split into clusters; neighbouring roots are
    grouped at successively finer distances until each group's mean is a root
    of the group's size.
    """
    c = [a.to_mp() for a in d.c]
    roots = list(_numeric_roots(d))
    pending = [roots]
    out = []
    for radius in ("1e-2", "1e-4", "1e-7", "1e-12", "1e-20", "0"):
        radius = mpmath.mpf(radius)
        nxt = []
        for group in pending:
            for sub in _link(group, radius):
                center = _refine(c, mpmath.fsum(sub) / len(sub), len(sub))
                if len(sub) == 1 or _is_root_of_order(c, center, len(sub)):
                    out.append((center, len(sub)))
                else:
                    nxt.append(sub)
        pending = nxt
        if not pending:
            break
    for group in pending:
        out.extend((z, 1) for z in group)
    return out


def _link(points, radius):
    """Single-linkage groups of ``points`` at relative distance ``radius``."""
    groups = []
    for z in points:
        near = [g for g in groups if any(abs(z - w) <= radius * (1 + abs(z)) for w in g)]
        merged = [z]
        for g in near:
            merged.extend(g)
            groups.remove(g)
        groups.append(merged)
    return groups


def _rationalize(z, f: PolyD):
    """Exact rational root near ``z`` if ``f`` has rational coefficients."""
    if not f.is_rational() or abs(mpmath.im(z)) > mpmath.mpf(10) ** (-working_dps() // 2):
        return None
    lcm_den = 1
    for a in f.c:
        lcm_den = lcm_den * a.q.denominator // _gcd(lcm_den, a.q.denominator)
    lead = abs(int(f.c[-1].q * lcm_den))
    re = mpmath.re(z)
    guess = Fraction(mpmath.nstr(re, working_dps(), min_fixed=-mpmath.inf, max_fixed=mpmath.inf)
                     if abs(re) > 0 else "0").limit_denominator(max(lead, 1))
    if f(ConstField.rational(guess)).is_zero():
        return ConstField.rational(guess)
    return None


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


_ROOT_CACHE: dict = {}


def find_roots(d: PolyD):
    """Roots of ``d`` with multiplicities: ``[(ConstField, mult), ...]``.

    Rational roots are exact; all others are high-precision numeric values.
    """
    if d.deg <= 0:
        return []
    key = (tuple(a.q for a in d.c), mpmath.mp.dps) if d.is_rational() else None
    if key in _ROOT_CACHE:
        return list(_ROOT_CACHE[key])
    out = []
    if d.is_rational():
        for f, mult in _squarefree(d):
            for z in _numeric_roots(f):
                exact = _rationalize(z, f)
                out.append((exact if exact is not None else ConstField.numeric(z), mult))
    else:
        out = [(ConstField.numeric(z), m) for z, m in _clustered_roots(d)]
    out.sort(key=lambda t: (-t[1], float(mpmath.re(t[0].to_mp())), float(mpmath.im(t[0].to_mp()))))
    if key is not None:
        if len(_ROOT_CACHE) > 4096:
            _ROOT_CACHE.clear()
        _ROOT_CACHE[key] = tuple(out)
    return out


def quotient_roots(d: PolyD, x: GPoly, y: GPoly):
    """Roots of the quotient denominator ``d`` of ``x / y`` with multiplicities.

    Every root of ``d`` is a root of a coefficient denominator of ``x`` or
    ``y`` or of the numerator of ``y``'s extreme coefficients.  For numeric
    ``d`` those low-degree factors locate the roots far more accurately than
    ``d`` itself, whose multiple roots split under rounding.
    """
    if d.deg <= 0:
        return []
    if d.is_rational():
        return find_roots(d)
    hints = [c.den for g in (x, y) for _, c in g.terms if c.den.deg > 0]
    hints += [c.num for _, c in (y.leading, y.trailing) if c.num.deg > 0]
    cand = []  # [root, largest multiplicity seen in a hint]
    for h in hints:
        for z, m in find_roots(h):
            zm = z.to_mp()
            for item in cand:
                if abs(zm - item[0].to_mp()) <= eps("root") * (1 + abs(zm)):
                    item[1] = max(item[1], m)
                    break
            else:
                cand.append([z, m])
    # deflate in order of expected multiplicity so that a cluster is removed
    # before its close neighbours are tested
    cand.sort(key=lambda t: -t[1])
    cur = [a.to_mp() for a in d.c]
    tol = eps("root")
    out = []
    for z, _ in cand:
        zm = z.to_mp()
        k = 0
        while len(cur) > 1:
            quo, rem = _synthetic_division(cur, zm)
            scale = mpmath.fsum(abs(a) * abs(zm) ** i for i, a in enumerate(cur))
            if abs(rem) > tol * scale:
                break
            cur = quo
            k += 1
        if k:
            out.append((z, k))
    if sum(k for _, k in out) != d.deg:
        return find_roots(d)
    out.sort(key=lambda t: (-t[1], float(mpmath.re(t[0].to_mp())), float(mpmath.im(t[0].to_mp()))))
    return out


# --- entire correction ---------------------------------------------------------


@dataclass
class EntireResult:
    qstar: GPoly
    p: RatD
    rstar: GPoly
    certificate: EntireReport | None
    roots: list = field(default_factory=list)
    numeric: bool = False
    division: DivisionResult | None = None


def _taylor_poly(a: PolyD, s: ConstField, n: int):
    """First ``n`` Taylor coefficients of polynomial ``a`` at ``s``."""
    out = []
    cur = list(a.c)
    for _ in range(n):
        # synthetic division by (X - s): remainder is the value
        if not cur:
            out.append(ZERO)
            continue
        acc = ZERO
        quo = []
        for c in reversed(cur):
            acc = acc * s + c
            quo.append(acc)
        out.append(quo[-1])
        cur = list(reversed(quo[:-1]))
    return out


def _exp_at(alpha: Exponent, s: ConstField) -> ConstField:
    if s.is_rational:
        return ConstField.exp(alpha * s.q)
    return ConstField.numeric(mpmath.exp(s.to_mp() * alpha.value))


def _alpha(alpha: Exponent) -> ConstField:
    return ConstField.from_exponent(alpha)


def symbol_taylor(qt: GPoly, s: ConstField, n: int):
    """Taylor coefficients at ``s`` of the symbol ``sum a_i(s) exp(s*alpha_i)``."""
    total = [ZERO] * n
    for alpha, c in qt.terms:
        a_t = _taylor_poly(c.num, s, n)
        e = _exp_at(alpha, s)
        al = _alpha(alpha)
        # exp(s*alpha) expands as exp(s0*alpha) * sum alpha^l h^l / l!
        pw = [ONE]
        for l in range(1, n):
            pw.append(pw[-1] * al / l)
        for j in range(n):
            acc = ZERO
            for l in range(j + 1):
                if not a_t[j - l].is_zero():
                    acc = acc + a_t[j - l] * pw[l]
            if not acc.is_zero():
                total[j] = total[j] + acc * e
    return total


def hermite_interpolate(qt: GPoly, roots) -> PolyD:
    """Polynomial N with deg N < sum(mult) matching the symbol of ``qt``
    to the multiplicity order at each root (confluent divided differences)."""
    nodes, data = [], []
    for s, mult in roots:
        t = symbol_taylor(qt, s, mult)
        for k in range(mult):
            nodes.append((s, len(data)))
        data.append(t)
    n = len(nodes)
    if n == 0:
        return PolyD()
    table = [[data[g][0]] for _, g in nodes]
    for k in range(1, n):
        for i in range(n - k):
            zi, gi = nodes[i]
            zk, gk = nodes[i + k]
            if gi == gk:
                table[i].append(data[gi][k])
            else:
                table[i].append((table[i + 1][k - 1] - table[i][k - 1]) / (zk - zi))
    out = PolyD()
    basis_poly = P_ONE
    for k in range(n):
        out = out + basis_poly * table[0][k]
        basis_poly = basis_poly * PolyD((-nodes[k][0], 1))
    return out


def make_entire(div: DivisionResult, *, check: bool = True) -> EntireResult:
    """Correct the quotient by ``p(dt) = -N/d`` so its symbol becomes entire."""
    q, r, y = div.q, div.r, div.y
    d = div.common_den
    if d.deg <= 0:
        return EntireResult(q, R_ZERO, r, EntireReport(True, []), [], False, div)
    qt = q * RatD(d)
    roots = quotient_roots(d, div.x, y)
    numeric = any(not s.is_exact for s, _ in roots)
    if numeric:
        warnings.warn(f"irrational roots of {d}; constants become numeric", NumericFallbackWarning)
    N = hermite_interpolate(qt, roots)
    p = RatD(-N, d)
    qstar = q + GPoly.const(p, q.basis)
    rstar = r - y * p
    cert = None
    if check:
        residual_num = qt - GPoly.const(RatD(N), q.basis)
        cert = check_entire(residual_num, roots)
        if not cert.passed:
            raise EntiretyCheckFailed(
                f"entire correction residual {mpmath.nstr(cert.max_residual, 3)} exceeds tolerance"
            )
    return EntireResult(qstar, p, rstar, cert, roots, numeric, div)


# --- single entry reduction ---------------------------------------------------


@dataclass
class EntryReduction:
    qstar: GPoly
    hbar: GPoly
    entire: EntireResult | None
    polynomial: bool  # hbar has polynomial coefficients


def needs_reduction(x: GPoly, y: GPoly) -> bool:
    if x.is_zero():
        return False
    return compare(x.deg_plus, y.deg_plus) > 0 or compare(x.deg_sigma, y.deg_sigma) > 0


def reduce_entry(x: GPoly, y: GPoly, *, force: bool = False) -> EntryReduction:
    """Return ``(qstar, hbar)`` with ``hbar = x - qstar*y`` inside the pivot's range."""
    if not force and not needs_reduction(x, y):
        return EntryReduction(GPoly.zero(x.basis or y.basis), x, None, x.is_polynomial())
    limit = settings.max_den_degree
    div = gpld(x, y, check=False, max_den_degree=limit)
    if limit is not None and div.common_den.deg > limit:
        raise ReductionDiverged(
            f"quotient denominator of degree {div.common_den.deg} exceeds the limit {limit}"
        )
    ent = make_entire(div)
    hbar = ent.rstar
    return EntryReduction(ent.qstar, hbar, ent, hbar.is_polynomial())
