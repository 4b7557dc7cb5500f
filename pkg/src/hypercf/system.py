"""Boundary-coupled transport systems and their input parametrization.

The system class couples an ODE ``dx/dt = F x + B u_ode`` at one boundary with
``n_minus`` backward and ``n_plus`` forward transport channels.  A flat output
of the ODE parametrizes its state and input as ``x = N(dt) y`` and
``u_ode = D(dt) y``; travelling through the channels then gives the actuated
input as ``u = H(sigma, dt) y`` with

    H = P D - Q1 Delta (Q0 D + C N),

where ``P = diag(sigma^tau_minus)`` predicts and ``Delta = diag(sigma^-tau_plus)``
delays.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError, NotControllable, StructureViolation
from .gpmatrix import GPolyMatrix, const_inverse, const_rank, row_sigma_degrees
from .gpoly import GPoly, PolyD, RatD
from .scalars import DelayBasis, Exponent, compare


def _fmat(rows, name, shape=None):
    try:
        out = [[Fraction(x) for x in row] for row in rows]
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{name}: entries must be rationals ({exc})") from None
    if out and any(len(r) != len(out[0]) for r in out):
        raise DomainError(f"{name}: ragged rows")
    if shape is not None:
        got = (len(out), len(out[0]) if out else 0)
        if got != shape and not (shape[0] == 0 or shape[1] == 0):
            raise DomainError(f"{name}: expected shape {shape}, got {got}")
    return out


def _matmul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), Fraction(0))
             for j in range(len(B[0]))] for i in range(len(A))]


def _vecmat(v, A):
    return [sum((v[k] * A[k][j] for k in range(len(v))), Fraction(0)) for j in range(len(A[0]))]


def _matvec(A, v):
    return [sum((A[i][k] * v[k] for k in range(len(v))), Fraction(0)) for i in range(len(A))]


def _col(A, j):
    return [row[j] for row in A]


def _exponent(x, basis):
    if isinstance(x, Exponent):
        return x
    if isinstance(x, str):
        return basis.exponent(x) if basis is not None else Exponent.const(Fraction(x))
    return Exponent.const(Fraction(x))


@dataclass
class HyperbolicSystem:
    """ODE ``(F, B)`` with transport delays and boundary couplings."""

    F: list
    B: list
    tau_minus: list
    tau_plus: list
    Q0: list
    Q1: list
    C: list
    basis: DelayBasis | None = None

    def __post_init__(self):
        self.F = _fmat(self.F, "F")
        n = len(self.F)
        if any(len(r) != n for r in self.F):
            raise DomainError("F must be square")
        self.B = _fmat(self.B, "B")
        if len(self.B) != n:
            raise DomainError(f"B must have {n} rows")
        self.tau_minus = [_exponent(t, self.basis) for t in self.tau_minus]
        self.tau_plus = [_exponent(t, self.basis) for t in self.tau_plus]
        k = self.n_minus
        if len(self.tau_minus) != k:
            raise DomainError(f"tau_minus needs {k} entries (one per ODE input)")
        npl = self.n_plus
        self.Q0 = _fmat(self.Q0, "Q0", (npl, k))
        self.Q1 = _fmat(self.Q1, "Q1", (k, npl))
        self.C = _fmat(self.C, "C", (npl, n))
        for name, taus in (("tau_minus", self.tau_minus), ("tau_plus", self.tau_plus)):
            for t in taus:
                if t.value <= 0:
                    raise DomainError(f"{name}: delays must be positive, got {t}")
            for a, b in zip(taus, taus[1:]):
                if compare(a, b) >= 0:
                    raise DomainError(f"{name}: delays must be strictly increasing")
        if const_rank(self.B) < k:
            raise DomainError("B must have full column rank")

    @property
    def n(self) -> int:
        return len(self.F)

    @property
    def n_minus(self) -> int:
        return len(self.B[0]) if self.B else 0

    @property
    def n_plus(self) -> int:
        return len(self.tau_plus)

    def check_class(self):
        """Rank conditions of the system class; raises on violation."""
        if const_rank(self.Q0) < self.n_plus:
            raise DomainError("Q0 must have rank n_plus")
        if const_rank(self.Q1) < self.n_minus:
            raise DomainError("Q1 must have rank n_minus")
        r = controllability_rank(self.F, self.B)
        if r < self.n:
            raise NotControllable(r, self.n)


def controllability_rank(F, B) -> int:
    n = len(F)
    cols = []
    cur = [list(r) for r in B]
    for _ in range(n):
        cols.extend(_col(cur, j) for j in range(len(B[0])))
        cur = _matmul(F, cur)
    return const_rank([list(r) for r in zip(*cols)]) if cols else 0


@dataclass
class FlatParam:
    """``x = N(dt) y`` and ``u = D(dt) y`` for the flat output ``y``."""

    N: list  # n x k PolyD
    D: list  # k x k PolyD
    nu: list  # Kronecker indices
    T: list = field(default_factory=list)  # rational change of coordinates z = T x

    def residual(self, F, B):
        """``dt*N - F*N - B*D`` as a PolyD matrix."""
        n, k = len(self.N), len(self.D)
        out = []
        for i in range(n):
            row = []
            for j in range(k):
                acc = self.N[i][j] * PolyD.monomial(1)
                for l in range(n):
                    if F[i][l]:
                        acc = acc - self.N[l][j] * F[i][l]
                for l in range(k):
                    if B[i][l]:
                        acc = acc - self.D[l][j] * B[i][l]
                row.append(acc)
            out.append(row)
        return out

    def column_degrees(self, M):
        return [max(M[i][j].deg for i in range(len(M))) for j in range(len(M[0]))]

    def is_column_reduced(self) -> bool:
        degs = self.column_degrees(self.D)
        lead = [[self.D[i][j].coeff(degs[j]) if degs[j] >= 0 else 0 for j in range(len(degs))]
                for i in range(len(self.D))]
        return const_rank(lead) == len(degs)


def kronecker_indices(F, B):
    """Greedy selection of independent columns from ``[B, FB, F^2 B, ...]``."""
    n, k = len(F), len(B[0])
    chosen = []
    nu = [0] * k
    alive = [True] * k
    cur = [list(r) for r in B]
    for _ in range(n):
        for j in range(k):
            if not alive[j]:
                continue
            v = _col(cur, j)
            trial = chosen + [v]
            if const_rank(trial) == len(trial):
                chosen.append(v)
                nu[j] += 1
            else:
                alive[j] = False
        cur = _matmul(F, cur)
    return nu, len(chosen)


def flat_parametrize(F, B) -> FlatParam:
    """Flat parametrization through the Luenberger controller form."""
    F = _fmat(F, "F")
    B = _fmat(B, "B")
    n, k = len(F), len(B[0])
    if const_rank(B) < k:
        raise DomainError("B must have full column rank")
    nu, rank = kronecker_indices(F, B)
    if rank < n:
        raise NotControllable(rank, n)
    # columns b_1, F b_1, ..., b_2, F b_2, ...
    cols = []
    for j in range(k):
        v = _col(B, j)
        for _ in range(nu[j]):
            cols.append(v)
            v = _matvec(F, v)
    CL = [list(r) for r in zip(*cols)]
    CLi = const_inverse(CL)
    ends = [sum(nu[: j + 1]) - 1 for j in range(k)]
    qs = [CLi[e] for e in ends]
    T, R, G = [], [], []
    for j in range(k):
        row = qs[j]
        for _ in range(nu[j]):
            T.append(row)
            last = row
            row = _vecmat(row, F)
        R.append(row)  # q_j F^nu_j
        G.append(_vecmat(last, B))  # q_j F^(nu_j - 1) B
    Ti = const_inverse(T)
    # z = S(dt) y: chain j holds y_j, dt y_j, ..., dt^(nu_j - 1) y_j
    S = []
    for j in range(k):
        for p in range(nu[j]):
            S.append([PolyD.monomial(p) if jj == j else PolyD() for jj in range(k)])
    N = _const_times_poly(Ti, S)
    RN = _const_times_poly(R, N)
    top = [[PolyD.monomial(nu[i]) if i == j else PolyD() for j in range(k)] for i in range(k)]
    Gi = const_inverse(G)
    D = _const_times_poly(Gi, [[top[i][j] - RN[i][j] for j in range(k)] for i in range(k)])
    return FlatParam(N, D, nu, T)


def _const_times_poly(A, P):
    out = []
    for i in range(len(A)):
        row = []
        for j in range(len(P[0])):
            acc = PolyD()
            for l in range(len(P)):
                if A[i][l]:
                    acc = acc + P[l][j] * A[i][l]
            row.append(acc)
        out.append(row)
    return out


def build_shift_matrices(sys: HyperbolicSystem):
    """Prediction matrix ``P`` and delay matrix ``Delta``."""
    P = GPolyMatrix.diag([GPoly.monomial(t) for t in sys.tau_minus], sys.basis)
    Dl = GPolyMatrix.diag([GPoly.monomial(-t) for t in sys.tau_plus], sys.basis)
    return P, Dl


def _poly_matrix(M, basis):
    return GPolyMatrix([[GPoly.const(RatD(p)) for p in row] for row in M], basis)


def _rational_matrix(M, basis):
    return GPolyMatrix([[GPoly.const(x) if x else 0 for x in row] for row in M], basis)


def build_H(sys: HyperbolicSystem, flat: FlatParam | None = None) -> GPolyMatrix:
    """Input parametrization ``u = H(sigma, dt) y``."""
    flat = flat or flat_parametrize(sys.F, sys.B)
    k = sys.n_minus
    if len(flat.D) != k or len(flat.N) != sys.n:
        raise DomainError("flat parametrization does not match the system dimensions")
    P, Dl = build_shift_matrices(sys)
    D = _poly_matrix(flat.D, sys.basis)
    N = _poly_matrix(flat.N, sys.basis)
    inner = _rational_matrix(sys.Q0, sys.basis) @ D + _rational_matrix(sys.C, sys.basis) @ N
    return P @ D - _rational_matrix(sys.Q1, sys.basis) @ (Dl @ inner)


def build_benchmark(alpha, beta, mass=1, basis: DelayBasis | None = None) -> GPolyMatrix:
    """Input parametrization of two strings coupled through a point mass.

    Rows belong to the string lengths ``alpha`` and ``beta``:
    ``[(m/2) dt^2 C_z + dt S_z, -/+ (1/2) C_z]`` with
    ``C_z = (sigma^z + sigma^-z)/2`` and ``S_z = (sigma^z - sigma^-z)/2``.
    """
    m = Fraction(mass)
    if m < 0:
        raise DomainError("mass must be nonnegative")
    rows = []
    for z, sign in ((alpha, -1), (beta, 1)):
        z = _exponent(z, basis)
        if z.value <= 0:
            raise DomainError("lengths must be positive")
        half = Fraction(1, 2)
        a_plus = PolyD([0, half, m / 4])  # (m/4) dt^2 + (1/2) dt
        a_minus = PolyD([0, -half, m / 4])
        h1 = GPoly([(z, RatD(a_plus)), (-z, RatD(a_minus))], basis)
        h2 = GPoly([(z, Fraction(sign, 4)), (-z, Fraction(sign, 4))], basis)
        rows.append([h1, h2])
    return GPolyMatrix(rows, basis)


def strings_demo_matrix() -> GPolyMatrix:
    """Benchmark with lengths pi and 10, unit mass, common factor 1/4 removed."""
    basis = DelayBasis({"pi": "pi"})
    return build_benchmark(basis["pi"], 10, 1, basis).scale(4)


def random_system(seed: int, n: int | None = None, n_minus: int | None = None) -> HyperbolicSystem:
    """Deterministic random member of the system class (n_plus = n_minus)."""
    rng = random.Random(seed)
    if n_minus is None:
        n_minus = rng.randint(1, 2)
    if n is None:
        n = rng.randint(n_minus, min(6, n_minus + 2))
    if not (1 <= n_minus <= 4 and n_minus <= n <= 6):
        raise DomainError("dimensions out of range (1 <= n_minus <= n <= 6, n_minus <= 4)")

    def small():
        return Fraction(rng.randint(-3, 3))

    def full_rank(r, c):
        while True:
            M = [[small() for _ in range(c)] for _ in range(r)]
            if const_rank(M) == min(r, c):
                return M

    def nonzero():
        return Fraction(rng.choice((-3, -2, -1, 1, 2, 3)))

    def dense_full_rank(r, c):
        while True:
            M = [[nonzero() for _ in range(c)] for _ in range(r)]
            if const_rank(M) == min(r, c):
                return M

    def delays():
        vals = set()
        while len(vals) < n_minus:
            vals.add(Fraction(rng.randint(1, 12), rng.choice((2, 3, 4))))
        return sorted(vals)

    while True:
        while True:
            F = [[small() for _ in range(n)] for _ in range(n)]
            B = full_rank(n, n_minus)
            if controllability_rank(F, B) == n:
                break
        Q0 = dense_full_rank(n_minus, n_minus)
        Q1 = dense_full_rank(n_minus, n_minus)
        C = [[small() for _ in range(n)] for _ in range(n_minus)]
        sys = HyperbolicSystem(F, B, delays(), delays(), Q0, Q1, C)
        try:
            row_sigma_degrees(build_H(sys))
        except StructureViolation:
            continue  # a cancellation dropped a shift; not of the class
        return sys
