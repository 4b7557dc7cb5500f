"""Matrices over generalized polynomials and the shift reduction.

Pipeline pieces: leading column coefficient matrices (lccm) with respect to
``dt`` and ``sigma``, the sorting by row/column permutations, the row
reduction of entries below the diagonal, inversion of the resulting unit
lower triangular transform and the separation ``Hbar = Hhat*K + Htilde``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .division import EntryReduction, needs_reduction, reduce_entry
from .errors import (
    DegenerateMatrix,
    NotReducible,
    PreconditionViolated,
    ReductionDiverged,
    StructureViolation,
)
from .gpoly import GPoly, PolyD, RatD, R_ONE, _as_gpoly, _merge_basis
from .scalars import ONE, ZERO, ConstField, Exponent, ZERO_EXP, compare


class GPolyMatrix:
    """Rectangular grid of GPoly entries over a shared delay basis."""

    __slots__ = ("rows", "basis")

    def __init__(self, rows, basis=None):
        rows = [[_as_gpoly(e) for e in row] for row in rows]
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("matrix rows have different lengths")
        for row in rows:
            for e in row:
                basis = _merge_basis(basis, e.basis)
        self.rows = [[e.with_basis(basis) for e in row] for row in rows]
        self.basis = basis

    @classmethod
    def identity(cls, n, basis=None):
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], basis)

    @classmethod
    def zeros(cls, n, m, basis=None):
        return cls([[0] * m for _ in range(n)], basis)

    @classmethod
    def diag(cls, entries, basis=None):
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)], basis)

    @property
    def shape(self):
        return len(self.rows), (len(self.rows[0]) if self.rows else 0)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def replaced(self, i, j, value) -> "GPolyMatrix":
        rows = [list(r) for r in self.rows]
        rows[i][j] = value
        return GPolyMatrix(rows, self.basis)

    def column(self, j):
        return [r[j] for r in self.rows]

    def __matmul__(self, other: "GPolyMatrix") -> "GPolyMatrix":
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for i in range(n):
            row = []
            for j in range(m):
                acc = []
                for l in range(k):
                    a, b = self.rows[i][l], other.rows[l][j]
                    if a and b:
                        if _is_unit(a):
                            acc.extend(b.terms)
                        elif _is_unit(b):
                            acc.extend(a.terms)
                        else:
                            acc.extend((a * b).terms)
                row.append(GPoly(acc))
            out.append(row)
        return GPolyMatrix(out, _merge_basis(self.basis, other.basis))

    def __add__(self, other):
        return GPolyMatrix(
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)],
            _merge_basis(self.basis, other.basis),
        )

    def __sub__(self, other):
        return GPolyMatrix(
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)],
            _merge_basis(self.basis, other.basis),
        )

    def scale(self, c) -> "GPolyMatrix":
        return GPolyMatrix([[e * c for e in r] for r in self.rows], self.basis)

    def permuted(self, row_perm=None, col_perm=None) -> "GPolyMatrix":
        n, m = self.shape
        rp = row_perm or range(n)
        cp = col_perm or range(m)
        return GPolyMatrix([[self.rows[i][j] for j in cp] for i in rp], self.basis)

    def symbol(self, lam) -> mpmath.matrix:
        n, m = self.shape
        out = mpmath.matrix(n, m)
        for i in range(n):
            for j in range(m):
                out[i, j] = self.rows[i][j].symbol(lam)
        return out

    def is_polynomial(self) -> bool:
        return all(e.is_polynomial() for r in self.rows for e in r)

    def __eq__(self, other):
        return (
            isinstance(other, GPolyMatrix)
            and self.shape == other.shape
            and all(a == b for r1, r2 in zip(self.rows, other.rows) for a, b in zip(r1, r2))
        )

    __hash__ = None

    def __str__(self):
        return "\n".join(f"[{i},{j}] {e}" for i, r in enumerate(self.rows) for j, e in enumerate(r))

    def __repr__(self):
        return f"GPolyMatrix({self.shape[0]}x{self.shape[1]})"


def _is_unit(x: GPoly) -> bool:
    if len(x.terms) != 1:
        return False
    e, c = x.terms[0]
    return not e.terms and e.offset == 0 and c.den.deg == 0 and c.num.deg == 0 and c.num.c[0].is_one()


def add_row_multiples(X: GPolyMatrix, j: int, factors: dict) -> GPolyMatrix:
    """Rows ``i`` of ``X`` plus ``factors[i] * row j``; other rows unchanged."""
    rows = [list(r) for r in X.rows]
    for i, f in factors.items():
        rows[i] = [a + f * b if b else a for a, b in zip(X.rows[i], X.rows[j])]
    return GPolyMatrix(rows, X.basis)


# --- constant matrices ---------------------------------------------------------


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, ConstField) else x == 0


def _magnitude(x):
    return abs(x.to_mp()) if isinstance(x, ConstField) else abs(x)


def _eliminate(M):
    """Row echelon form by Gaussian elimination; returns (rank, rows, pivots)."""
    A = [list(r) for r in M]
    n = len(A)
    m = len(A[0]) if A else 0
    rank = 0
    pivots = []
    for col in range(m):
        cand = [i for i in range(rank, n) if not _is_zero(A[i][col])]
        if not cand:
            continue
        p = max(cand, key=lambda i: _magnitude(A[i][col]))
        A[rank], A[p] = A[p], A[rank]
        piv = A[rank][col]
        for i in range(n):
            if i != rank and not _is_zero(A[i][col]):
                f = A[i][col] / piv
                A[i] = [a - f * b for a, b in zip(A[i], A[rank])]
        pivots.append(col)
        rank += 1
        if rank == n:
            break
    return rank, A, pivots


def const_rank(M) -> int:
    if not M or not M[0]:
        return 0
    return _eliminate(M)[0]


def const_inverse(M):
    n = len(M)
    one = ConstField.rational(1) if any(isinstance(x, ConstField) for r in M for x in r) else Fraction(1)
    zero = one * 0
    aug = [list(M[i]) + [one if i == j else zero for j in range(n)] for i in range(n)]
    rank, A, piv = _eliminate(aug)
    if rank < n or piv[: n] != list(range(n)):
        raise NotReducible("constant matrix is singular")
    return [[A[i][n + j] / A[i][i] for j in range(n)] for i in range(n)]


# --- lccm ---------------------------------------------------------------------


def _check_columns(M: GPolyMatrix):
    n, m = M.shape
    for j in range(m):
        if all(e.is_zero() for e in M.column(j)):
            raise DegenerateMatrix(f"column {j} is zero")


def lccm_dt(M: GPolyMatrix) -> GPolyMatrix:
    """Per column, coefficient of the highest dt power (sigma structure kept)."""
    _check_columns(M)
    n, m = M.shape
    out = [[None] * m for _ in range(n)]
    for j in range(m):
        top = max(e.deg_dt for e in M.column(j) if e)
        for i in range(n):
            e = M[i, j]
            out[i][j] = GPoly(
                [(x, RatD.const(c.lc)) for x, c in e.terms if c.deg == top], M.basis
            )
    return GPolyMatrix(out, M.basis)


def lccm_sigma_plus(M: GPolyMatrix) -> GPolyMatrix:
    """Per column, coefficient of the largest sigma exponent (as sigma^0 entries)."""
    _check_columns(M)
    n, m = M.shape
    out = [[None] * m for _ in range(n)]
    for j in range(m):
        col = [e for e in M.column(j) if e]
        top = col[0].deg_plus
        for e in col[1:]:
            if compare(e.deg_plus, top) > 0:
                top = e.deg_plus
        for i in range(n):
            e = M[i, j]
            ok = e and compare(e.deg_plus, top) == 0
            out[i][j] = GPoly.const(e.leading[1], M.basis) if ok else GPoly.zero(M.basis)
    return GPolyMatrix(out, M.basis)


def lccm_sigma_diam(M: GPolyMatrix) -> GPolyMatrix:
    """Per column, leading coefficient of the entries of maximal sigma diameter."""
    _check_columns(M)
    n, m = M.shape
    out = [[None] * m for _ in range(n)]
    for j in range(m):
        col = [e for e in M.column(j) if e]
        top = col[0].deg_sigma
        for e in col[1:]:
            if compare(e.deg_sigma, top) > 0:
                top = e.deg_sigma
        for i in range(n):
            e = M[i, j]
            ok = e and compare(e.deg_sigma, top) == 0
            out[i][j] = GPoly.const(e.leading[1], M.basis) if ok else GPoly.zero(M.basis)
    return GPolyMatrix(out, M.basis)


def to_constants(M: GPolyMatrix):
    """Entries that are constant sigma^0 terms, as a ConstField grid."""
    out = []
    for row in M.rows:
        r = []
        for e in row:
            if e.is_zero():
                r.append(ZERO)
                continue
            if len(e.terms) != 1 or e.terms[0][0] or not e.terms[0][1].is_const():
                raise DegenerateMatrix(f"entry {e} is not constant")
            c = e.terms[0][1]
            r.append(c.num.coeff(0))
        out.append(r)
    return out


def composed_lccm(M: GPolyMatrix, order: str = "sigma_dt", sigma: str = "plus"):
    """Constant matrix obtained by composing the sigma and dt lccm maps.

    ``order="sigma_dt"`` applies the sigma map first.
    """
    fs = lccm_sigma_plus if sigma == "plus" else lccm_sigma_diam
    if order == "sigma_dt":
        return to_constants(lccm_dt(fs(M)))
    return to_constants(fs(lccm_dt(M)))


def lccm_commutes(M: GPolyMatrix) -> bool:
    for sigma in ("plus", "diam"):
        a = composed_lccm(M, "sigma_dt", sigma)
        b = composed_lccm(M, "dt_sigma", sigma)
        if any(not (x == y) for ra, rb in zip(a, b) for x, y in zip(ra, rb)):
            return False
    return True


# --- sorting ------------------------------------------------------------------


def row_sigma_degrees(H: GPolyMatrix):
    out = []
    for i, row in enumerate(H.rows):
        nz = [e for e in row if e]
        if not nz:
            raise StructureViolation(f"row {i} is zero")
        d = nz[0].deg_sigma
        for e in nz[1:]:
            if compare(e.deg_sigma, d) != 0:
                raise StructureViolation(
                    f"row {i} has non-uniform sigma degrees ({d} vs {e.deg_sigma})"
                )
        out.append(d)
    return out


def _derivative_ordered(H: GPolyMatrix, rp, cp) -> bool:
    n = len(rp)
    for l in range(n):
        diag = H[rp[l], cp[l]]
        if not diag:
            return False
        top = diag.deg_dt
        for i in range(n):
            e = H[rp[i], cp[l]]
            if e and e.deg_dt > top:
                return False
    return True


def sort_by_degree(H: GPolyMatrix):
    """Permute rows (inputs) and columns (flat outputs) so that sigma degrees
    ascend down each column and each column's largest dt degree sits on the
    diagonal.  Returns ``(row_perm, col_perm, sorted_H)``."""
    n, m = H.shape
    if n != m:
        raise StructureViolation("matrix must be square")
    degs = row_sigma_degrees(H)
    order = sorted(range(n), key=lambda i: degs[i].value)
    groups, cur = [], [order[0]]
    for i in order[1:]:
        if compare(degs[i], degs[cur[-1]]) == 0:
            cur.append(i)
        else:
            groups.append(cur)
            cur = [i]
    groups.append(cur)
    row_candidates = (
        [x for g in combo for x in g]
        for combo in itertools.product(*(itertools.permutations(g) for g in groups))
    )
    for rp in row_candidates:
        for cp in itertools.permutations(range(m)):
            if _derivative_ordered(H, rp, cp):
                rp, cp = list(rp), list(cp)
                return rp, cp, H.permuted(rp, cp)
    raise StructureViolation("no permutation puts the largest dt degrees on the diagonal")


# --- reduction ----------------------------------------------------------------


def degree_violations(H: GPolyMatrix, below_only: bool = False):
    """Entries violating the column-wise degree conditions against the pivot.

    Returns a list of ``(i, j, reason)``.
    """
    n, m = H.shape
    out = []
    for j in range(m):
        piv = H[j, j]
        if not piv:
            out.append((j, j, "zero pivot"))
            continue
        for i in range(n):
            if i == j or (below_only and i < j):
                continue
            e = H[i, j]
            if not e:
                continue
            if compare(e.deg_plus, piv.deg_plus) > 0:
                out.append((i, j, "deg_plus"))
            elif compare(e.deg_sigma, piv.deg_sigma) > 0:
                out.append((i, j, "deg_sigma"))
            elif e.deg_dt > piv.deg_dt:
                out.append((i, j, "deg_dt"))
    return out


@dataclass
class ReductionOutput:
    Hbar: GPolyMatrix
    L: GPolyMatrix
    row_perm: list
    col_perm: list
    passes: int
    H: GPolyMatrix  # permuted input; Hbar = L @ H
    reductions: list = field(default_factory=list)  # (pass, i, j, EntryReduction)


def compute_transform(X: GPolyMatrix, j: int):
    """Elementary factor clearing column ``j`` below the diagonal."""
    n = X.shape[0]
    Lc = GPolyMatrix.identity(n, X.basis)
    found = []
    for i in range(j + 1, n):
        if needs_reduction(X[i, j], X[j, j]):
            red = reduce_entry(X[i, j], X[j, j])
            Lc = Lc.replaced(i, j, -red.qstar)
            found.append((i, j, red))
    return Lc, found


def reduce_shifts(H: GPolyMatrix, *, passes: int | None = None, sort: bool = True) -> ReductionOutput:
    """Row-reduce ``H`` until every column satisfies the degree conditions.

    Raises ReductionDiverged when the pass budget (default ``2*n``) runs out
    and NotReducible when no further progress is possible or the composed
    lccm of the result is singular.
    """
    n, _ = H.shape
    if sort:
        rp, cp, H = sort_by_degree(H)
    else:
        rp, cp = list(range(n)), list(range(n))
    budget = 2 * n if passes is None else passes
    Hbar, L = H, GPolyMatrix.identity(n, H.basis)
    done = 0
    log = []
    while degree_violations(Hbar, below_only=True):
        if done >= budget:
            raise ReductionDiverged(f"degree conditions still violated after {done} passes")
        progress = False
        for j in range(n - 1):
            Lc, found = compute_transform(Hbar, j)
            if found:
                factors = {i: Lc[i, jj] for i, jj, _ in found}
                Hbar = add_row_multiples(Hbar, j, factors)
                L = add_row_multiples(L, j, factors)
                log.extend((done, i, jj, red) for i, jj, red in found)
                progress = True
        done += 1
        if not progress:
            bad = degree_violations(Hbar, below_only=True)
            raise NotReducible(f"no row operation can repair entries {bad}")
    bad = degree_violations(Hbar)
    if bad:
        raise NotReducible(f"entries above the diagonal violate the degree conditions: {bad}")
    if const_rank(composed_lccm(Hbar)) < n:
        raise NotReducible("composed lccm of the reduced matrix is singular")
    return ReductionOutput(Hbar, L, rp, cp, done, H, log)


def invert_unitriangular(L: GPolyMatrix) -> GPolyMatrix:
    """Inverse of a unit lower triangular matrix by forward substitution."""
    n, m = L.shape
    if n != m:
        raise PreconditionViolated("matrix must be square")
    for i in range(n):
        if not (L[i, i] == GPoly.const(1)):
            raise PreconditionViolated(f"diagonal entry {i} is not 1")
        for j in range(i + 1, n):
            if L[i, j]:
                raise PreconditionViolated(f"entry ({i},{j}) above the diagonal is nonzero")
    X = [[GPoly.zero(L.basis)] * n for _ in range(n)]
    for k in range(n):
        X[k][k] = GPoly.const(1, L.basis)
        for i in range(k + 1, n):
            acc = GPoly.zero(L.basis)
            for l in range(k, i):
                if L[i, l] and X[l][k]:
                    acc = acc + L[i, l] * X[l][k]
            X[i][k] = -acc
    return GPolyMatrix(X, L.basis)


# --- separation ---------------------------------------------------------------


@dataclass
class Separation:
    Hhat: list  # ConstField grid
    K: list  # [(nu_j, tau_hat_j)]
    Htilde: GPolyMatrix
    tau_check: list  # deg_minus of the diagonal entries

    def K_matrix(self, basis=None) -> GPolyMatrix:
        return GPolyMatrix.diag(
            [GPoly.monomial(t, RatD(PolyD.monomial(nu)), basis) for nu, t in self.K], basis
        )

    def Hhat_matrix(self, basis=None) -> GPolyMatrix:
        return GPolyMatrix([[GPoly.const(c, basis) for c in r] for r in self.Hhat], basis)


def separate(Hbar: GPolyMatrix) -> Separation:
    """Split ``Hbar = Hhat*K + Htilde`` with ``K = diag(dt^nu_j sigma^tau_j)``."""
    n, m = Hbar.shape
    K, check = [], []
    for j in range(m):
        piv = Hbar[j, j]
        if not piv:
            raise NotReducible(f"diagonal entry {j} is zero")
        K.append((piv.deg_dt, piv.deg_plus))
        check.append(piv.deg_minus)
    Hhat = [[ZERO] * m for _ in range(n)]
    rows = [list(r) for r in Hbar.rows]
    for j, (nu, tau) in enumerate(K):
        for i in range(n):
            c = Hbar[i, j].coeff_at(tau)
            if not c.is_zero() and c.deg == nu:
                Hhat[i][j] = c.lc
                rows[i][j] = Hbar[i, j] - GPoly.monomial(tau, RatD(PolyD.monomial(nu, c.lc)))
    if const_rank(Hhat) < min(n, m):
        raise NotReducible("Hhat is singular")
    return Separation(Hhat, K, GPolyMatrix(rows, Hbar.basis), check)
