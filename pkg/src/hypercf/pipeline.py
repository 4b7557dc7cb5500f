"""End-to-end reduction of an input parametrization and its oracle checks."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction

import mpmath

from .division import EntryReduction, quotient_roots
from .errors import NotReducible
from .gpmatrix import (
    GPolyMatrix,
    ReductionOutput,
    Separation,
    composed_lccm,
    const_rank,
    degree_violations,
    invert_unitriangular,
    reduce_shifts,
    separate,
    sort_by_degree,
)
from .gpoly import GPoly, PolyD, RatD
from .hcf import HcfDescription, ReductionStep, describe
from .oracle import check_entire, check_identity
from .scalars import ConstField

FAULT_TARGETS = ("qstar", "L", "Hhat")


def matrix_hash(H: GPolyMatrix) -> str:
    """Digest of the canonical form of ``H`` and its delay basis."""
    from .hcf import _matrix_doc

    doc = {"basis": H.basis.to_dict() if H.basis is not None else {}, "H": _matrix_doc(H)}
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


@dataclass
class PipelineResult:
    H: GPolyMatrix  # input after the sorting permutations
    reduction: ReductionOutput
    separation: Separation
    Linv: GPolyMatrix
    description: HcfDescription
    faults: list = field(default_factory=list)


def _unreduced(H: GPolyMatrix) -> ReductionOutput:
    """Sorting only; the degree conditions and the lccm rank must already hold."""
    rp, cp, Hs = sort_by_degree(H)
    n = Hs.shape[0]
    r = const_rank(composed_lccm(Hs))
    if r < n:
        raise NotReducible(f"composed lccm has rank {r} < {n} without reduction")
    bad = degree_violations(Hs)
    if bad:
        raise NotReducible(f"degree conditions violated without reduction: {bad}")
    return ReductionOutput(Hs, GPolyMatrix.identity(n, Hs.basis), rp, cp, 0, Hs, [])


def run_pipeline(H: GPolyMatrix, *, passes: int | None = None, reduce: bool = True) -> PipelineResult:
    """Sort, reduce, separate and assemble the DDE for ``u = H y``."""
    red = reduce_shifts(H, passes=passes) if reduce else _unreduced(H)
    sep = separate(red.Hbar)
    Linv = invert_unitriangular(red.L)
    desc = describe(red, sep)
    desc.input_hash = matrix_hash(H)
    return PipelineResult(red.H, red, sep, Linv, desc)


# --- fault injection -------------------------------------------------------------


def _perturb_gpoly(x: GPoly, rng: random.Random, rel) -> GPoly:
    slots = [(t, k) for t, (_, c) in enumerate(x.terms) for k, a in enumerate(c.num.c) if not a.is_zero()]
    t, k = rng.choice(slots)
    terms = list(x.terms)
    e, c = terms[t]
    num = list(c.num.c)
    num[k] = num[k].perturbed(rel)
    terms[t] = (e, RatD(PolyD(num), c.den, reduce=False))
    return GPoly(terms, x.basis)


def inject_fault(res: PipelineResult, target: str, seed: int = 0, rel=Fraction(1, 10**10)) -> str:
    """Perturb one nonzero coefficient of ``target`` in place; returns a description."""
    rng = random.Random(seed)
    rel = Fraction(rel) * (1 + Fraction(rng.randint(0, 1000), 1000))
    if rng.random() < 0.5:
        rel = -rel
    d = res.description
    if target == "qstar":
        steps = d.steps
        if not steps:
            raise NotReducible("no reduction step to perturb")
        s = rng.randrange(len(steps))
        d.steps[s] = replace(steps[s], qstar=_perturb_gpoly(steps[s].qstar, rng, rel))
        note = f"qstar of step {s}"
    elif target == "L":
        n = d.L.shape[0]
        cells = [(i, j) for i in range(n) for j in range(n) if d.L[i, j]]
        i, j = rng.choice(cells)
        d.L = d.L.replaced(i, j, _perturb_gpoly(d.L[i, j], rng, rel))
        note = f"L[{i},{j}]"
    elif target == "Hhat":
        cells = [(i, j) for i, row in enumerate(d.Hhat) for j, x in enumerate(row) if not x.is_zero()]
        i, j = rng.choice(cells)
        d.Hhat = [list(r) for r in d.Hhat]
        d.Hhat[i][j] = d.Hhat[i][j].perturbed(rel)
        note = f"Hhat[{i},{j}]"
    else:
        raise ValueError(f"unknown fault target {target!r}; choose from {FAULT_TARGETS}")
    note += f" scaled by 1 + {float(rel):.3e}"
    res.faults.append(note)
    return note


# --- oracle suite ----------------------------------------------------------------


def _const_matrix(C, basis):
    return GPolyMatrix([[GPoly.const(x, basis) if not x.is_zero() else 0 for x in r] for r in C], basis)


def run_checks(res: PipelineResult, *, trials: int = 64, tol=None, tol_entire=None, seed: int = 0):
    """All identity checks on the recorded pipeline data.

    Returns a list of report objects with ``passed`` and ``line()``.
    """
    d = res.description
    basis = d.Hbar.basis
    n = d.Hbar.shape[0]
    kw = dict(trials=trials, tol=tol, seed=seed)
    out = []
    out.append(check_identity(d.Hbar, d.L @ res.H, name="Hbar = L*H", **kw))
    K = GPolyMatrix.diag([GPoly.monomial(t, RatD(PolyD.monomial(nu)), basis) for nu, t in d.K], basis)
    Hh = _const_matrix(d.Hhat, basis)
    out.append(check_identity(d.Hbar, Hh @ K + d.Htilde, name="Hbar = Hhat*K + Htilde", **kw))
    out.append(check_identity(d.L @ res.Linv, GPolyMatrix.identity(n, basis), name="L*Linv = I", **kw))
    # K y = A y + B u with u = H y
    out.append(check_identity(Hh @ K, Hh @ (d.dde.A + d.dde.B @ res.H), name="Hhat*K = Hhat*(A + B*H)", **kw))
    for s in d.steps:
        out.append(
            check_identity(
                s.x, s.qstar * s.y + s.hbar, name=f"step {s.row},{s.col}: x = qstar*y + hbar", **kw
            )
        )
        if s.den.deg > 0:
            qt = s.qstar * RatD(s.den)
            rep = check_entire(qt, quotient_roots(s.den, s.x, s.y), tol=tol_entire)
            rep.name = f"step {s.row},{s.col}: qstar entire"
            out.append(rep)
    return out
