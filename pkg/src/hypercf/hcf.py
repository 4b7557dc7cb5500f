"""Explicit DDE system and hyperbolic controller form description.

From ``L^{-1} u = Hbar y`` and ``Hbar = Hhat K + Htilde`` we get, block by block,

    y_i^(nu_i)(t + tau_hat_i) = sum_j (A_ij y_j)(t) + sum_k (B_ik u_k)(t)

with ``A = -Hhat^{-1} Htilde`` and ``B = Hhat^{-1} L^{-1}``.  The state of block
``i`` is the chain ``y_i, ..., y_i^(nu_i - 1)`` evaluated at ``t + tau_check_i``
plus the transport profile ``y_i^(nu_i)(t + tau)`` on ``[tau_check_i, tau_hat_i]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import NotReducible, SchemaError
from .gpmatrix import GPolyMatrix, Separation, const_inverse
from .gpoly import GPoly, PolyD, RatD
from .scalars import ZERO, ConstField, DelayBasis, Exponent, compare, parse_const, parse_exponent

CLASSES = ("classic", "discontinuous", "non-causal", "quasi")


def _at(e: Exponent) -> str:
    """``t + e`` with the sign folded in."""
    text = str(e)
    if text == "0":
        return "t"
    return f"t - {text[1:]}" if text.startswith("-") else f"t + {text}"


@dataclass(frozen=True)
class Atom:
    """``coeff(dt) * sigma^exponent`` acting on component ``target``."""

    target: int
    exponent: Exponent
    coeff: RatD


@dataclass
class Block:
    nu: int
    tau_hat: Exponent
    tau_check: Exponent
    A: list = field(default_factory=list)
    B: list = field(default_factory=list)


@dataclass
class DdeSystem:
    blocks: list
    A: GPolyMatrix
    B: GPolyMatrix
    Hhat_inv: list

    @property
    def basis(self):
        return self.A.basis


def _atoms(row):
    out = []
    for j, e in enumerate(row):
        for x, c in e.terms:
            out.append(Atom(j, x, c))
    return out


def _const_left(C, M: GPolyMatrix) -> GPolyMatrix:
    n = len(C)
    _, m = M.shape
    rows = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = []
            for l in range(len(C[i])):
                if not C[i][l].is_zero() and M[l, j]:
                    acc.extend((M[l, j] * C[i][l]).terms)
            row.append(GPoly(acc, M.basis))
        rows.append(row)
    return GPolyMatrix(rows, M.basis)


def assemble_dde(sep: Separation, L: GPolyMatrix) -> DdeSystem:
    """Solve ``K y = Hhat^{-1} (L u - Htilde y)`` block by block.

    ``L`` is the accumulated row transformation with ``Hbar = L H``, so
    ``u = H y`` gives ``L u = (Hhat K + Htilde) y``.
    """
    try:
        Hi = const_inverse(sep.Hhat)
    except NotReducible:
        raise NotReducible("Hhat is singular") from None
    A = _const_left(Hi, sep.Htilde).scale(-1)
    B = _const_left(Hi, L)
    blocks = []
    for i, (nu, tau) in enumerate(sep.K):
        blocks.append(Block(nu, tau, sep.tau_check[i], _atoms(A.rows[i]), _atoms(B.rows[i])))
    return DdeSystem(blocks, A, B, Hi)


def classify(dde: DdeSystem) -> str:
    """Controller-form variant read off the input map.

    Input delays alone (no predictions) are reported as quasi, the only class
    whose input support allows negative shifts.
    """
    atoms = [a for b in dde.blocks for a in b.B]
    if any(a.coeff.deg > 0 for a in atoms):
        return "discontinuous"
    signs = {compare(a.exponent, Exponent()) for a in atoms}
    if signs <= {0} and all(a.coeff.is_const() for a in atoms):
        return "classic"
    if -1 in signs:
        return "quasi"
    return "non-causal"


@dataclass(frozen=True)
class ResidualTerm:
    """``y_target^(order)(t + shift)`` in the equation of ``block``."""

    block: int
    target: int
    order: int | None  # None for a distributed (proper rational) kernel
    shift: Exponent

    def __str__(self):
        d = "~" if self.order is None else str(self.order)
        return f"block {self.block}: y{self.target}^({d})({_at(self.shift)})"


def residual_terms(dde: DdeSystem) -> list:
    """Flat-output evaluations in the A tables that the state does not cover."""
    out = []
    for i, blk in enumerate(dde.blocks):
        for a in blk.A:
            tgt = dde.blocks[a.target]
            inside = compare(a.exponent, tgt.tau_check) >= 0 and compare(a.exponent, tgt.tau_hat) <= 0
            if not a.coeff.is_poly():
                if not inside:
                    out.append(ResidualTerm(i, a.target, None, a.exponent))
                continue
            for p, c in enumerate(a.coeff.num.c):
                if c.is_zero():
                    continue
                if p == tgt.nu and inside:
                    continue
                if p < tgt.nu and compare(a.exponent, tgt.tau_check) == 0:
                    continue
                out.append(ResidualTerm(i, a.target, p, a.exponent))
    return out


@dataclass(frozen=True)
class ReductionStep:
    """One entry reduction ``hbar = x - qstar*y`` with ``qstar = q + p``."""

    pass_: int
    row: int
    col: int
    x: GPoly
    y: GPoly
    q: GPoly
    p: RatD
    qstar: GPoly
    hbar: GPoly
    den: PolyD  # common denominator of q


def _steps(reduction) -> list:
    out = []
    for k, i, j, red in reduction.reductions:
        ent = red.entire
        div = ent.division
        out.append(ReductionStep(k, i, j, div.x, div.y, div.q, ent.p, red.qstar, red.hbar, div.common_den))
    return out


@dataclass
class HcfDescription:
    """Everything a report needs: the reduction, the separation and the DDE."""

    basis: DelayBasis | None
    row_perm: list
    col_perm: list
    L: GPolyMatrix
    Hbar: GPolyMatrix
    Hhat: list
    K: list
    Htilde: GPolyMatrix
    dde: DdeSystem
    classification: str
    residuals: list
    steps: list = field(default_factory=list)  # ReductionStep
    input_hash: str | None = None
    oracle: list = field(default_factory=list)  # [{"name", "passed", "max_residual", ...}]

    @property
    def blocks(self):
        return [(b.nu, (b.tau_check, b.tau_hat)) for b in self.dde.blocks]

    def state_map(self):
        lines = []
        for i, b in enumerate(self.dde.blocks):
            for k in range(b.nu):
                lines.append(f"x{i}_{k + 1}(t) = y{i}^({k})({_at(b.tau_check)})")
            lines.append(
                f"w{i}(tau, t) = y{i}^({b.nu})(t + tau), tau in [{b.tau_check}, {b.tau_hat}]"
            )
        return lines

    def state_dimensions(self):
        return sum(b.nu for b in self.dde.blocks), len(self.dde.blocks)

    def __eq__(self, other):
        return isinstance(other, HcfDescription) and to_document(self) == to_document(other)

    __hash__ = None


def describe(reduction, sep: Separation) -> HcfDescription:
    dde = assemble_dde(sep, reduction.L)
    return HcfDescription(
        reduction.Hbar.basis,
        list(reduction.row_perm),
        list(reduction.col_perm),
        reduction.L,
        reduction.Hbar,
        sep.Hhat,
        list(sep.K),
        sep.Htilde,
        dde,
        classify(dde),
        residual_terms(dde),
        _steps(reduction),
    )


# --- serialization -------------------------------------------------------------


def _poly_doc(p: PolyD):
    return [str(c) for c in p.c]


def _ratd_doc(c: RatD):
    return {"num": _poly_doc(c.num), "den": _poly_doc(c.den)}


def _gpoly_doc(x: GPoly):
    return [[str(e), _ratd_doc(c)] for e, c in x.terms]


def _matrix_doc(M: GPolyMatrix):
    n, m = M.shape
    entries = [[i, j, _gpoly_doc(M[i, j])] for i in range(n) for j in range(m) if M[i, j]]
    return {"shape": [n, m], "entries": entries}


def _const_grid_doc(C):
    return [[str(x) for x in row] for row in C]


def _atoms_doc(atoms):
    return [[a.target, str(a.exponent), _ratd_doc(a.coeff)] for a in atoms]


def to_document(h: HcfDescription) -> dict:
    """Machine-readable report (JSON-compatible, deterministic)."""
    return {
        "input_hash": h.input_hash,
        "basis": h.basis.to_dict() if h.basis is not None else {},
        "permutations": {"rows": h.row_perm, "cols": h.col_perm},
        "L": _matrix_doc(h.L),
        "Hbar": _matrix_doc(h.Hbar),
        "Hhat": _const_grid_doc(h.Hhat),
        "K": [[nu, str(t)] for nu, t in h.K],
        "Htilde": _matrix_doc(h.Htilde),
        "blocks": [
            {
                "nu": b.nu,
                "tau_check": str(b.tau_check),
                "tau_hat": str(b.tau_hat),
                "A": _atoms_doc(b.A),
                "B": _atoms_doc(b.B),
            }
            for b in h.dde.blocks
        ],
        "classification": h.classification,
        "residuals": [[r.block, r.target, r.order, str(r.shift)] for r in h.residuals],
        "reductions": [
            {
                "pass": st.pass_,
                "row": st.row,
                "col": st.col,
                "x": _gpoly_doc(st.x),
                "y": _gpoly_doc(st.y),
                "q": _gpoly_doc(st.q),
                "p": _ratd_doc(st.p),
                "qstar": _gpoly_doc(st.qstar),
                "hbar": _gpoly_doc(st.hbar),
                "den": _poly_doc(st.den),
            }
            for st in h.steps
        ],
        "oracle": h.oracle,
    }


def _need(doc, key, where="report"):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"{where}: missing field {key!r}")
    return doc[key]


def _parse_poly(items, basis):
    return PolyD([parse_const(s, basis) for s in items])


def _parse_ratd(doc, basis):
    return RatD(_parse_poly(_need(doc, "num", "coefficient"), basis),
                _parse_poly(_need(doc, "den", "coefficient"), basis), reduce=False)


def _parse_gpoly(items, basis):
    return GPoly([(parse_exponent(e, basis), _parse_ratd(c, basis)) for e, c in items], basis)


def _parse_matrix(doc, basis):
    n, m = _need(doc, "shape", "matrix")
    rows = [[GPoly.zero(basis) for _ in range(m)] for _ in range(n)]
    for i, j, terms in _need(doc, "entries", "matrix"):
        rows[i][j] = _parse_gpoly(terms, basis)
    return GPolyMatrix(rows, basis)


def _parse_atoms(items, basis):
    return [Atom(t, parse_exponent(e, basis), _parse_ratd(c, basis)) for t, e, c in items]


def from_document(doc: dict) -> HcfDescription:
    basis_doc = _need(doc, "basis")
    basis = DelayBasis(basis_doc) if basis_doc else None
    perms = _need(doc, "permutations")
    blocks = []
    for b in _need(doc, "blocks"):
        blocks.append(
            Block(
                int(_need(b, "nu", "block")),
                parse_exponent(_need(b, "tau_hat", "block"), basis),
                parse_exponent(_need(b, "tau_check", "block"), basis),
                _parse_atoms(_need(b, "A", "block"), basis),
                _parse_atoms(_need(b, "B", "block"), basis),
            )
        )
    Hhat = [[parse_const(x, basis) for x in row] for row in _need(doc, "Hhat")]
    m = len(blocks)

    def table(key):
        rows = [[[] for _ in range(m)] for _ in range(m)]
        for i, b in enumerate(blocks):
            for a in getattr(b, key):
                rows[i][a.target].append((a.exponent, a.coeff))
        return GPolyMatrix([[GPoly(t, basis) for t in r] for r in rows], basis)

    dde = DdeSystem(blocks, table("A"), table("B"), const_inverse(Hhat) if Hhat else [])
    cls = _need(doc, "classification")
    if cls not in CLASSES:
        raise SchemaError(f"unknown classification {cls!r}")
    return HcfDescription(
        basis,
        list(_need(perms, "rows", "permutations")),
        list(_need(perms, "cols", "permutations")),
        _parse_matrix(_need(doc, "L"), basis),
        _parse_matrix(_need(doc, "Hbar"), basis),
        Hhat,
        [(int(nu), parse_exponent(t, basis)) for nu, t in _need(doc, "K")],
        _parse_matrix(_need(doc, "Htilde"), basis),
        dde,
        cls,
        [ResidualTerm(b, t, o, parse_exponent(s, basis)) for b, t, o, s in _need(doc, "residuals")],
        [
            ReductionStep(
                st["pass"],
                st["row"],
                st["col"],
                *(_parse_gpoly(st[k], basis) for k in ("x", "y", "q")),
                _parse_ratd(st["p"], basis),
                *(_parse_gpoly(st[k], basis) for k in ("qstar", "hbar")),
                _parse_poly(st["den"], basis),
            )
            for st in doc.get("reductions", [])
        ],
        doc.get("input_hash"),
        list(doc.get("oracle") or []),
    )


def parse_report(text: str) -> HcfDescription:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_document(doc)


# --- rendering -----------------------------------------------------------------


def _grid_str(C) -> str:
    n = len(C)
    diagonal = all(C[i][j].is_zero() for i in range(n) for j in range(n) if i != j)
    if diagonal:
        return "diag(%s)" % ", ".join(str(C[i][i]) for i in range(n))
    return "[%s]" % "; ".join(", ".join(str(x) for x in row) for row in C)


def _atom_str(a: Atom, name: str) -> str:
    return f"({a.coeff})*sigma^({a.exponent}) {name}{a.target}"


def _render_text(h: HcfDescription) -> str:
    out = []
    if h.input_hash:
        out.append(f"input_hash = {h.input_hash}")
    if h.basis is not None and len(h.basis):
        out.append("basis: " + ", ".join(f"{k} = {v}" for k, v in h.basis.to_dict().items()))
    out.append(f"row permutation = {h.row_perm}")
    out.append(f"column permutation = {h.col_perm}")
    out.append("L:")
    out.extend("  " + line for line in str(h.L).splitlines())
    for st in h.steps:
        out.append(f"reduction of entry [{st.row},{st.col}] (pass {st.pass_}):")
        out.append(f"  q = {st.q}")
        out.append(f"  p = {st.p}")
        out.append(f"  qstar = {st.qstar}")
        out.append(f"  hbar = {st.hbar}")
    out.append("Hbar:")
    out.extend("  " + line for line in str(h.Hbar).splitlines())
    out.append(f"Hhat = {_grid_str(h.Hhat)}")
    out.append("K = diag(%s)" % ", ".join(f"dt^{nu}*sigma^({t})" for nu, t in h.K))
    out.append("Htilde:")
    out.extend("  " + line for line in str(h.Htilde).splitlines())
    out.append("DDE:")
    for i, b in enumerate(h.dde.blocks):
        rhs = [_atom_str(a, "y") for a in b.A] + [_atom_str(a, "u") for a in b.B]
        out.append(f"  y{i}^({b.nu})({_at(b.tau_hat)}) = " + (" + ".join(rhs) or "0"))
    out.append("blocks:")
    for i, (nu, (lo, hi)) in enumerate(h.blocks):
        out.append(f"  {i}: nu = {nu}, interval [{lo}, {hi}]")
    out.append("state:")
    out.extend("  " + s for s in h.state_map())
    out.append(f"classification = {h.classification}")
    if h.residuals:
        out.append("residual terms:")
        out.extend(f"  {r}" for r in h.residuals)
    if h.oracle:
        out.append("oracle:")
        out.extend(f"  {'PASS' if o['passed'] else 'FAIL'} {o['name']}: {o['max_residual']}" for o in h.oracle)
    return "\n".join(out) + "\n"


def _tex_exp(e: Exponent) -> str:
    return str(e).replace("*", "").replace("pi", r"\pi ").replace(" ", "")


def _tex_poly(p: PolyD) -> str:
    parts = []
    for k in range(p.deg, -1, -1):
        c = p.c[k]
        if c.is_zero():
            continue
        cs = str(c)
        mono = "" if k == 0 else (r"\partial_t" if k == 1 else rf"\partial_t^{{{k}}}")
        if mono and c.is_one():
            parts.append(mono)
        else:
            parts.append(f"({cs}){mono}" if mono else f"({cs})")
    return " + ".join(parts) or "0"


def _tex_ratd(c: RatD) -> str:
    if c.den.deg == 0:
        return _tex_poly(c.num)
    return rf"\frac{{{_tex_poly(c.num)}}}{{{_tex_poly(c.den)}}}"


def _tex_atom(a: Atom, name: str) -> str:
    return rf"\left({_tex_ratd(a.coeff)}\right)\sigma^{{{_tex_exp(a.exponent)}}}{name}_{{{a.target + 1}}}"


def _render_latex(h: HcfDescription) -> str:
    out = [r"\begin{align*}"]
    lines = []
    for i, b in enumerate(h.dde.blocks):
        rhs = [_tex_atom(a, "y") for a in b.A] + [_tex_atom(a, "u") for a in b.B]
        lines.append(
            rf"y_{{{i + 1}}}^{{({b.nu})}}(t + {_tex_exp(b.tau_hat)}) &= " + (" + ".join(rhs) or "0")
        )
    out.append(" \\\\\n".join(lines))
    out.append(r"\end{align*}")
    hh = r" \\ ".join(" & ".join(str(x) for x in row) for row in h.Hhat)
    out.append(rf"\hat H = \begin{{pmatrix}} {hh} \end{{pmatrix}}, \quad \text{{{h.classification}}}")
    return "\n".join(out) + "\n"


def emit_report(h: HcfDescription, fmt: str = "text") -> str:
    if fmt == "text":
        return _render_text(h)
    if fmt in ("json", "json-like"):
        return json.dumps(to_document(h), indent=1, sort_keys=True) + "\n"
    if fmt == "latex":
        return _render_latex(h)
    raise ValueError(f"unknown format {fmt!r}")
