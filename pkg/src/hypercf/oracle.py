"""Numerical certification of symbolic identities.

Operators are compared through their Laplace symbols: ``sigma**a`` becomes
``exp(lam*a)`` and ``dt`` becomes ``lam``, evaluated at random complex points
at working precision.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath

from .errors import PolePointError
from .scalars import DelayBasis, eps, working_dps

POLE_MARGIN = mpmath.mpf("1e-3")


@dataclass(frozen=True)
class SymbolPoint:
    lam: mpmath.mpc
    basis: DelayBasis | None = None


def _check_poles(x, lam):
    for _, c in x.terms:
        den = c.den
        if den.deg <= 0:
            continue
        if abs(den.eval_mp(lam)) < abs(den.lc.to_mp()) * POLE_MARGIN ** den.deg:
            raise PolePointError(f"sample point {lam} too close to a pole of {c}")


def eval_symbol(x, pt) -> mpmath.mpc:
    """Laplace symbol of a GPoly (or GPolyMatrix) at ``pt``."""
    lam = pt.lam if isinstance(pt, SymbolPoint) else mpmath.mpmathify(pt)
    if hasattr(x, "rows"):
        for row in x.rows:
            for e in row:
                _check_poles(e, lam)
    else:
        _check_poles(x, lam)
    return x.symbol(lam)


def sample_points(n: int, radius: float = 5.0, seed: int = 0):
    """``n`` points uniformly distributed in the disc ``|lam| <= radius``."""
    rng = random.Random(seed)
    while True:
        r = radius * math.sqrt(rng.random())
        t = 2 * math.pi * rng.random()
        yield mpmath.mpc(r * math.cos(t), r * math.sin(t))


def _values(obj, lam):
    if callable(obj) and not hasattr(obj, "symbol"):
        v = obj(lam)
    else:
        v = eval_symbol(obj, lam)
    if isinstance(v, mpmath.matrix):
        return [v[i, j] for i in range(v.rows) for j in range(v.cols)]
    if isinstance(v, (list, tuple)):
        return list(v)
    return [v]


@dataclass
class IdentityReport:
    name: str
    passed: bool
    max_residual: mpmath.mpf
    points: int
    seed: int
    tol: mpmath.mpf

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: max residual {mpmath.nstr(self.max_residual, 3)} "
            f"(tol {mpmath.nstr(self.tol, 2)}, {self.points} points, seed {self.seed})"
        )


def check_identity(
    lhs,
    rhs,
    trials: int = 64,
    tol=None,
    *,
    radius: float = 5.0,
    seed: int = 0,
    name: str = "identity",
) -> IdentityReport:
    """Compare two operators at ``trials`` random points.

    ``lhs``/``rhs`` are GPoly, GPolyMatrix or callables of ``lam``.  The
    residual is ``|lhs - rhs| / max(|lhs|, 1)`` entrywise; failures are
    reported, not raised.
    """
    tol = eps("oracle") if tol is None else mpmath.mpf(tol)
    worst = mpmath.mpf(0)
    used = 0
    skipped = 0
    with mpmath.workdps(working_dps()):
        for lam in sample_points(10 * trials + 100, radius, seed):
            if used >= trials:
                break
            try:
                a = _values(lhs, lam)
                b = _values(rhs, lam)
            except (PolePointError, ZeroDivisionError):
                skipped += 1
                continue
            if len(a) != len(b):
                return IdentityReport(name, False, mpmath.inf, used, seed, tol)
            for u, v in zip(a, b):
                res = abs(u - v) / max(abs(u), 1)
                if res > worst:
                    worst = res
            used += 1
    return IdentityReport(name, bool(worst <= tol) and used == trials, worst, used, seed, tol)


@dataclass
class EntireReport:
    passed: bool
    residuals: list = field(default_factory=list)  # (root, multiplicity, residual)
    tol: mpmath.mpf = None
    name: str = "entirety"

    @property
    def max_residual(self):
        return max((r for _, _, r in self.residuals), default=mpmath.mpf(0))

    def line(self, name=None) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {name or self.name}: max local residual "
            f"{mpmath.nstr(self.max_residual, 3)} at {len(self.residuals)} roots"
        )


def _root_mp(r):
    return r.to_mp() if hasattr(r, "to_mp") else mpmath.mpmathify(r)


def _contour_radius(numerator, s0, others) -> mpmath.mpf:
    """Small circle around ``s0``: clear of the other roots and short against
    the fastest exponential in ``numerator``."""
    rho = mpmath.mpf("0.25")
    if others:
        rho = min(rho, min(abs(s0 - z) for z in others) / 3)
    if hasattr(numerator, "terms") and numerator.terms:
        fastest = max(abs(e.value) for e, _ in numerator.terms)
        rho = min(rho, 1 / (2 * fastest + 1))
    return rho


def check_entire(numerator, roots: Sequence, tol=None, scale: Callable | None = None) -> EntireReport:
    """Check that ``numerator`` vanishes to the order of each root's multiplicity.

    ``numerator`` is a GPoly with polynomial coefficients (or a callable);
    ``roots`` holds ``(root, multiplicity)`` pairs of the denominator.  The
    first ``mult`` Taylor terms at each root are obtained from a discrete
    Cauchy integral on a small circle and compared against the size of the
    individual terms of the numerator at the root.
    """
    tol = eps("entire") if tol is None else mpmath.mpf(tol)
    f = numerator if callable(numerator) and not hasattr(numerator, "symbol") else numerator.symbol
    out = []
    with mpmath.workdps(working_dps()):
        points = [_root_mp(r) for r, _ in roots]
        for idx, (root, mult) in enumerate(roots):
            s0 = points[idx]
            rho = _contour_radius(numerator, s0, points[:idx] + points[idx + 1 :])
            n = 2 * mult + 32
            w = [mpmath.expjpi(mpmath.mpf(2 * j) / n) for j in range(n)]
            circle = [s0 + rho * z for z in w]
            if scale is not None:
                sc = max(scale(z) for z in circle)
            elif hasattr(numerator, "terms"):
                sc = max(
                    mpmath.fsum(abs(c.eval_mp(z)) * abs(mpmath.exp(z * e.value)) for e, c in numerator.terms)
                    for z in circle
                )
            else:
                sc = max(abs(f(z)) for z in circle)
            sc = max(sc, 1)
            vals = [f(z) for z in circle]
            # k-th Taylor term on the circle: c_k rho^k
            terms = [abs(mpmath.fsum(v * w[(-j * k) % n] for j, v in enumerate(vals)) / n) for k in range(mult)]
            out.append((root, mult, max(terms) / sc))
    return EntireReport(all(r <= tol for _, _, r in out), out, tol)
