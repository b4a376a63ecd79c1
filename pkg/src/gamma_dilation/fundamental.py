"""Fundamental operators on the defect space of the pivot contraction.

For a 7-tuple the equations are T_i - T_{7-i}^H T_7 = D F_i D with D the
defect of T_7. Writing D = Q Lam Q^H on its range, the unique solution on
the defect space is F_i = Lam^-1 Q^H (T_i - T_{7-i}^H T_7) Q Lam^-1, and the
equation is solvable at all iff the left side lives on range(D) x range(D).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .linalg import DEFAULT_TOL, DefectData, adj, commutator, defect, op_norm
from .report import CheckReport
from .tuples import OperatorTuple

CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"

# defect eigenvalues below this fraction of the largest trigger a conditioning warning
ILL_CONDITIONED = 1e-6


@dataclass
class _SolvedSet:
    defect: DefectData
    residuals: list
    status: str
    scale: float
    warnings: list = field(default_factory=list)
    method: str = "diagonal"

    @property
    def consistent(self):
        return self.status == CONSISTENT

    @property
    def rank(self):
        return self.defect.rank

    def expand(self, F):
        return self.defect.expand(F)


@dataclass
class FundamentalSet333(_SolvedSet):
    F: list = field(default_factory=list)

    def op(self, i):
        """F_i for i = 1..6 (defect-basis coordinates)."""
        return self.F[i - 1]

    def full(self, i):
        return self.expand(self.F[i - 1])


@dataclass
class FundamentalSet312(_SolvedSet):
    G1: np.ndarray = None
    G2: np.ndarray = None
    Gt1: np.ndarray = None
    Gt2: np.ndarray = None

    @property
    def ops(self):
        return {"G1": self.G1, "G2": self.G2, "Gt1": self.Gt1, "Gt2": self.Gt2}

    def full(self, name):
        return self.expand(self.ops[name])


def _check_family(tup, family):
    if not isinstance(tup, OperatorTuple) or tup.family != family:
        raise InputError(f"expected an OperatorTuple of family {family}")


def _solve_diag(L, dd: DefectData):
    Q, lam = dd.basis, dd.eigenvalues
    inv = 1.0 / lam
    F = inv[:, None] * (adj(Q) @ L @ Q) * inv[None, :]
    recon = (Q * lam) @ F @ (lam[:, None] * adj(Q))
    return F, op_norm(L - recon)


def _solve_lstsq(L, dd: DefectData):
    """Same equation solved as a vectorized least-squares problem: (B^T kron A) vec F = vec L."""
    A = dd.basis * dd.eigenvalues  # Q Lam, d x r
    B = dd.to_basis()  # Lam Q^H, r x d
    r = dd.rank
    K = np.kron(B.T, A)
    x, *_ = np.linalg.lstsq(K, L.reshape(-1, order="F"), rcond=None)
    F = x.reshape((r, r), order="F")
    return F, op_norm(L - A @ F @ B)


def _solve_all(lhs, pivot, tol, method, cutoff=None):
    dd = defect(pivot, tol, cutoff)
    scale = max([1.0] + [op_norm(L) for L in lhs])
    warnings = []
    if dd.rank:
        lam_max = float(dd.eigenvalues.max())
        small = dd.eigenvalues[dd.eigenvalues <= ILL_CONDITIONED * lam_max]
        if small.size:
            warnings.append(f"ill-conditioned defect: {small.size} eigenvalue(s) <= "
                            f"{ILL_CONDITIONED:g} * max; inverse amplifies noise by up to "
                            f"{1.0 / float(small.min()) ** 2:.2e}")
    sols, res = [], []
    for L in lhs:
        if dd.rank == 0:
            F, rr = np.zeros((0, 0), dtype=complex), op_norm(L)
        elif method == "lstsq":
            F, rr = _solve_lstsq(L, dd)
        elif method == "diagonal":
            F, rr = _solve_diag(L, dd)
        else:
            raise InputError(f"unknown method {method!r}")
        sols.append(F)
        res.append(float(rr))
    status = CONSISTENT if all(r <= tol * scale for r in res) else INCONSISTENT
    return dd, sols, res, status, scale, warnings


def lhs_333(tup: OperatorTuple):
    T = tup.operators
    return [T[i] - adj(T[5 - i]) @ T[6] for i in range(6)]


def lhs_312(tup: OperatorTuple):
    S1, S2, S3, St1, St2 = tup.operators
    return [S1 - adj(St2) @ S3,            # D G1 D
            (S2 - adj(St1) @ S3) / 2,      # D G2 D
            (St1 - adj(S2) @ S3) / 2,      # D Gt1 D
            St2 - adj(S1) @ S3]            # D Gt2 D


def solve_fundamental_333(tup: OperatorTuple, tol=DEFAULT_TOL, method="diagonal",
                          check_commuting=True, cutoff=None) -> FundamentalSet333:
    """Solve T_i - T_{7-i}^H T_7 = D F_i D for i = 1..6 on the defect space of T_7."""
    _check_family(tup, "gamma333")
    if check_commuting:
        tup.require_commuting(tol)
    dd, F, res, status, scale, warn = _solve_all(lhs_333(tup), tup[6], tol, method, cutoff)
    return FundamentalSet333(dd, res, status, scale, warn, method, F)


def solve_fundamental_312(tup: OperatorTuple, tol=DEFAULT_TOL, method="diagonal",
                          check_commuting=True, cutoff=None) -> FundamentalSet312:
    """Solve the four equations for G1, G2, Gt1, Gt2 on the defect space of S3."""
    _check_family(tup, "gamma312")
    if check_commuting:
        tup.require_commuting(tol)
    dd, G, res, status, scale, warn = _solve_all(lhs_312(tup), tup[2], tol, method, cutoff)
    return FundamentalSet312(dd, res, status, scale, warn, method, *G)


def residual_report(fset, tol=DEFAULT_TOL) -> CheckReport:
    rep = CheckReport("fundamental equations", options_used={"tol": tol, "method": fset.method})
    names = ([f"F{i}" for i in range(1, 7)] if isinstance(fset, FundamentalSet333)
             else ["G1", "G2", "Gt1", "Gt2"])
    for name, r in zip(names, fset.residuals):
        rep.upper(f"residual {name}", r, tol * fset.scale)
    rep.notes.extend(fset.warnings)
    return rep


def _rel(res, *mats):
    return res / max([1.0] + [op_norm(M) for M in mats])


def verify_lemma_identities_333(tup: OperatorTuple, fset: FundamentalSet333,
                                tol=DEFAULT_TOL) -> CheckReport:
    """D T_i = F_i D + F_{7-i}^H D T_7 and T_i^H T_i - T_{7-i}^H T_{7-i} = D(F_i^H F_i - F_{7-i}^H F_{7-i})D."""
    _check_family(tup, "gamma333")
    rep = CheckReport("fundamental identities (gamma333)", options_used={"tol": tol})
    if not fset.consistent:
        rep.notes.append("fundamental set is inconsistent; identities evaluated anyway")
    T = tup.operators
    D = fset.defect.defect
    Fh = [fset.full(i) for i in range(1, 7)]
    scale = max(1.0, max(op_norm(M) for M in T))
    for i in range(6):
        j = 5 - i
        lhs = D @ T[i]
        rhs = Fh[i] @ D + adj(Fh[j]) @ D @ T[6]
        rep.upper(f"D T{i + 1} = F{i + 1} D + F{j + 1}^H D T7", op_norm(lhs - rhs), tol * scale)
    for i in range(6):
        j = 5 - i
        lhs = adj(T[i]) @ T[i] - adj(T[j]) @ T[j]
        rhs = D @ (adj(Fh[i]) @ Fh[i] - adj(Fh[j]) @ Fh[j]) @ D
        rep.upper(f"T{i + 1}^H T{i + 1} - T{j + 1}^H T{j + 1} = D(F{i + 1}^H F{i + 1} - "
                  f"F{j + 1}^H F{j + 1})D", op_norm(lhs - rhs), tol * scale * scale)
    return rep


def verify_lemma_identities_312(tup: OperatorTuple, gset: FundamentalSet312,
                                tol=DEFAULT_TOL) -> CheckReport:
    _check_family(tup, "gamma312")
    rep = CheckReport("fundamental identities (gamma312)", options_used={"tol": tol})
    if not gset.consistent:
        rep.notes.append("fundamental set is inconsistent; identities evaluated anyway")
    S1, S2, S3, St1, St2 = tup.operators
    D = gset.defect.defect
    G1, G2, Gt1, Gt2 = (gset.full(n) for n in ("G1", "G2", "Gt1", "Gt2"))
    scale = max(1.0, max(op_norm(M) for M in tup.operators))
    linear = [
        ("D S1 = G1 D + Gt2^H D S3", D @ S1, G1 @ D + adj(Gt2) @ D @ S3),
        ("D St2 = Gt2 D + G1^H D S3", D @ St2, Gt2 @ D + adj(G1) @ D @ S3),
        ("D S2/2 = G2 D + Gt1^H D S3", D @ S2 / 2, G2 @ D + adj(Gt1) @ D @ S3),
        ("D St1/2 = Gt1 D + G2^H D S3", D @ St1 / 2, Gt1 @ D + adj(G2) @ D @ S3),
    ]
    for name, lhs, rhs in linear:
        rep.upper(name, op_norm(lhs - rhs), tol * scale)
    quad = [
        ("S1^H S1 - St2^H St2 = D(G1^H G1 - Gt2^H Gt2)D",
         adj(S1) @ S1 - adj(St2) @ St2, D @ (adj(G1) @ G1 - adj(Gt2) @ Gt2) @ D),
        ("(S2^H S2 - St1^H St1)/4 = D(G2^H G2 - Gt1^H Gt1)D",
         (adj(S2) @ S2 - adj(St1) @ St1) / 4, D @ (adj(G2) @ G2 - adj(Gt1) @ Gt1) @ D),
    ]
    for name, lhs, rhs in quad:
        rep.upper(name, op_norm(lhs - rhs), tol * scale * scale)
    return rep


def _comm_item(rep, name, M, tol, *ops):
    bound = tol * max([1.0] + [op_norm(X) for X in ops]) ** 2
    rep.upper(name, op_norm(M), bound)


def hypotheses_333(F, tol=DEFAULT_TOL, title="dilation hypotheses (gamma333)") -> CheckReport:
    """[F_i, F_j] = 0 and [F_{7-i}^H, F_j] = [F_{7-j}^H, F_i] for all pairs i < j."""
    F = [np.asarray(X, dtype=complex) for X in F]
    rep = CheckReport(title, options_used={"tol": tol})
    for i, j in itertools.combinations(range(6), 2):
        _comm_item(rep, f"(i) [F{i + 1},F{j + 1}] = 0", commutator(F[i], F[j]), tol, F[i], F[j])
    for i, j in itertools.combinations(range(6), 2):
        lhs = commutator(adj(F[5 - i]), F[j])
        rhs = commutator(adj(F[5 - j]), F[i])
        _comm_item(rep, f"(ii) [F{6 - i}^H,F{j + 1}] = [F{6 - j}^H,F{i + 1}]", lhs - rhs, tol,
                   F[i], F[j], F[5 - i], F[5 - j])
    return rep


def hypotheses_312(G1, G2, Gt1, Gt2, tol=DEFAULT_TOL,
                   title="dilation hypotheses (gamma312)") -> CheckReport:
    """Six commutators and six adjoint-commutator identities on (G1, G2, Gt1, Gt2)."""
    G1, G2, Gt1, Gt2 = (np.asarray(X, dtype=complex) for X in (G1, G2, Gt1, Gt2))
    ops = (G1, G2, Gt1, Gt2)
    rep = CheckReport(title, options_used={"tol": tol})
    c = commutator
    for name, M in [("[G1,Gt1]", c(G1, Gt1)), ("[G1,Gt2]", c(G1, Gt2)),
                    ("[G2,Gt1]", c(G2, Gt1)), ("[G2,Gt2]", c(G2, Gt2)),
                    ("[G1,G2]", c(G1, G2)), ("[Gt1,Gt2]", c(Gt1, Gt2))]:
        _comm_item(rep, f"(i) {name} = 0", M, tol, *ops)
    ident = [
        ("[G1,G1^H] = [Gt2,Gt2^H]", c(G1, adj(G1)) - c(Gt2, adj(Gt2))),
        ("[G2,G2^H] = [Gt1,Gt1^H]", c(G2, adj(G2)) - c(Gt1, adj(Gt1))),
        ("[G1,Gt1^H] = [G2,Gt2^H]", c(G1, adj(Gt1)) - c(G2, adj(Gt2))),
        ("[Gt1,G1^H] = [Gt2,G2^H]", c(Gt1, adj(G1)) - c(Gt2, adj(G2))),
        ("[G1,G2^H] = [Gt1,Gt2^H]", c(G1, adj(G2)) - c(Gt1, adj(Gt2))),
        ("[G1^H,G2] = [Gt1^H,Gt2]", c(adj(G1), G2) - c(adj(Gt1), Gt2)),
    ]
    for name, M in ident:
        _comm_item(rep, f"(ii) {name}", M, tol, *ops)
    return rep


def check_dilation_hypotheses_333(fset: FundamentalSet333, tol=DEFAULT_TOL) -> CheckReport:
    rep = hypotheses_333(fset.F if fset.rank else [np.zeros((0, 0))] * 6, tol)
    if not fset.consistent:
        rep.notes.append("fundamental set is inconsistent")
    return rep


def check_dilation_hypotheses_312(gset: FundamentalSet312, tol=DEFAULT_TOL) -> CheckReport:
    rep = hypotheses_312(gset.G1, gset.G2, gset.Gt1, gset.Gt2, tol)
    if not gset.consistent:
        rep.notes.append("fundamental set is inconsistent")
    return rep


def scalar_fundamental_333(x):
    """Closed form for a 1x1 tuple: F_i = (x_i - conj(x_{7-i}) x_7) / (1 - |x_7|^2)."""
    x = np.asarray(x, dtype=complex)
    den = 1.0 - abs(x[6]) ** 2
    return np.array([(x[i] - np.conj(x[5 - i]) * x[6]) / den for i in range(6)])


def scalar_fundamental_312(p):
    """Closed forms (G1, G2, Gt1, Gt2) for a 1x1 tuple (x1, x2, x3, y1, y2)."""
    x1, x2, x3, y1, y2 = np.asarray(p, dtype=complex)
    den = 1.0 - abs(x3) ** 2
    return np.array([(x1 - np.conj(y2) * x3) / den,
                     (x2 - np.conj(y1) * x3) / (2 * den),
                     (y1 - np.conj(x2) * x3) / (2 * den),
                     (y2 - np.conj(x1) * x3) / den])
