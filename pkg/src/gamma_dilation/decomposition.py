"""Maximal unitary part of a contraction and the canonical split of Gamma-contractions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .checks import check_unitary312, check_unitary333
from .errors import DecompositionError, InputError, NotContractionError
from .linalg import DEFAULT_TOL, adj, as_matrix, hermitian_part, null_space, op_norm
from .report import CheckReport
from .tuples import PIVOT, OperatorTuple


def unitary_part(T, tol=DEFAULT_TOL):
    """Orthonormal basis of the largest reducing subspace on which T is unitary.

    Start from ker(I - T^H T) and ker(I - T T^H), then repeatedly keep only
    vectors x of the current subspace K with T x and T^H x in K. Preimages
    are kernels of (I - P_K) T restricted to K, never inverses.
    """
    T = as_matrix(T, "T", square=True)
    d = T.shape[0]
    nrm = op_norm(T)
    if nrm > 1 + tol:
        raise NotContractionError(f"not a contraction: norm {nrm:.6g}", nrm)
    if d == 0:
        return np.zeros((0, 0), dtype=complex)
    I = np.eye(d)
    stacked = np.vstack([I - adj(T) @ T, I - T @ adj(T)])
    B = null_space(stacked, tol * max(1.0, op_norm(stacked)))
    for _ in range(d + 1):
        k = B.shape[1]
        if k == 0:
            break
        comp = I - B @ adj(B)
        cond = np.vstack([comp @ T @ B, comp @ adj(T) @ B])
        Y = null_space(cond, tol * max(1.0, nrm))
        if Y.shape[1] == k:
            break
        B = B @ Y
        # re-orthonormalize against drift
        B, _ = np.linalg.qr(B)
    return B


def orth_complement(B, d):
    if B.shape[1] == 0:
        return np.eye(d, dtype=complex)
    return null_space(adj(B), 1e-10)


@dataclass
class DecompResult:
    h1_basis: np.ndarray
    h2_basis: np.ndarray
    restricted_unitary: OperatorTuple
    restricted_cnu: OperatorTuple
    residuals: dict
    unitary_report: CheckReport | None = None
    notes: list = field(default_factory=list)

    @property
    def dim_unitary(self):
        return self.h1_basis.shape[1]

    @property
    def dim_cnu(self):
        return self.h2_basis.shape[1]


def _decompose(tup: OperatorTuple, tol, unitary_check, seed):
    tup.require_commuting(tol)
    piv = PIVOT[tup.family]
    T = tup.operators
    nrm = op_norm(T[piv])
    if nrm > 1 + tol:
        raise NotContractionError(f"pivot is not a contraction: norm {nrm:.6g}", nrm)
    d = tup.dim
    h1 = unitary_part(T[piv], tol)
    h2 = orth_complement(h1, d)
    if h1.shape[1] + h2.shape[1] != d:
        raise DecompositionError("complement dimension mismatch", -1, float("nan"))
    off = []
    for idx, M in enumerate(T):
        res = max(op_norm(adj(h2) @ M @ h1), op_norm(adj(h1) @ M @ h2)) if h1.size and h2.size else 0.0
        off.append(res)
        if res > tol * max(1.0, op_norm(M)):
            raise DecompositionError(f"H1 does not reduce {tup.names[idx]}: residual {res:.3e}",
                                     idx, res)
    U = tup.restrict(h1)
    C = tup.restrict(h2)
    U.tag, C.tag = "unitary_part", "cnu_part"
    P1 = U.operators[piv]
    unit = op_norm(adj(P1) @ P1 - np.eye(P1.shape[0])) if P1.size else 0.0
    cert = unitary_part(C.operators[piv], tol).shape[1] if C.dim else 0
    residuals = {"off_diagonal": off, "unitarity": unit, "cnu_certificate": cert}
    urep = unitary_check(U, tol, seed) if U.dim else None
    res = DecompResult(h1, h2, U, C, residuals, urep)
    if h1.shape[1] == 0:
        res.notes.append("unitary part is {0}")
    if h2.shape[1] == 0:
        res.notes.append("completely non-unitary part is {0}")
    return res


def canonical_decompose_333(tup: OperatorTuple, tol=DEFAULT_TOL, seed=0) -> DecompResult:
    """Split along the maximal unitary part of T7 into unitary and c.n.u. summands."""
    if tup.family != "gamma333":
        raise InputError("canonical_decompose_333 needs a gamma333 tuple")
    return _decompose(tup, tol, check_unitary333, seed)


def canonical_decompose_312(tup: OperatorTuple, tol=DEFAULT_TOL, seed=0) -> DecompResult:
    if tup.family != "gamma312":
        raise InputError("canonical_decompose_312 needs a gamma312 tuple")
    return _decompose(tup, tol, check_unitary312, seed)


# (a, b) pairs with the pivot: a_11 = b_11^H pivot_1; scale factors apply to both members
_PAIRS = {
    "gamma333": [((i, 1.0), (5 - i, 1.0)) for i in range(6)],
    "gamma312": [((0, 1.0), (4, 1.0)), ((4, 1.0), (0, 1.0)),
                 ((1, 0.5), (3, 0.5)), ((3, 0.5), (1, 0.5))],
}


def _m_operator(A, B, P, z1, z2):
    """(I - P^H P) - Re z1 (B - A^H P) - Re z2 (A - B^H P)."""
    d = P.shape[0]
    X = B - adj(A) @ P
    Y = A - adj(B) @ P
    return hermitian_part(np.eye(d) - adj(P) @ P - hermitian_part(z1 * X) - hermitian_part(z2 * Y))


def verify_block_identities(tup: OperatorTuple, result: DecompResult, tol=1e-9,
                            z_samples=12) -> CheckReport:
    """Structural claims of the canonical decomposition, in the basis [h1 h2].

    Off-diagonal blocks vanish; the unitary corner satisfies the boundary
    relations; the sum of the two rho pencils, M(z1, z2), is PSD with a zero
    corner block and hence a zero off-diagonal block.
    """
    W = np.hstack([result.h1_basis, result.h2_basis])
    k = result.dim_unitary
    d = tup.dim
    if W.shape != (d, d):
        raise InputError("decomposition bases do not match the tuple dimension")
    piv = PIVOT[tup.family]
    B = [adj(W) @ M @ W for M in tup.operators]
    names = tup.names
    rep = CheckReport("canonical decomposition identities",
                      options_used={"tol": tol, "z_samples": z_samples})
    scale = max([1.0] + [op_norm(M) for M in B])
    for nm, M in zip(names, B):
        off = max(op_norm(M[:k, k:]), op_norm(M[k:, :k])) if 0 < k < d else 0.0
        rep.upper(f"{nm} off-diagonal blocks vanish", off, tol * scale)
    P = B[piv]
    P1, P2 = P[:k, :k], P[k:, k:]
    if k:
        rep.upper(f"{names[piv]} unitary on H1", op_norm(adj(P1) @ P1 - np.eye(k)), tol)
    else:
        rep.skip(f"{names[piv]} unitary on H1", "H1 = {0}")
    for (a, fa), (b, fb) in _PAIRS[tup.family]:
        la = names[a] if fa == 1 else f"{names[a]}/2"
        lb = names[b] if fb == 1 else f"{names[b]}/2"
        A, Bm = B[a] * fa, B[b] * fb
        if k:
            res = op_norm(A[:k, :k] - adj(Bm[:k, :k]) @ P1)
            rep.upper(f"{la}_11 = {lb}_11^H {names[piv]}_1", res, tol * scale)
        if 0 < k < d:
            # off-diagonal relations: A_12 = B_21^H P_2, A_21 = B_12^H P_1
            r12 = op_norm(A[:k, k:] - adj(Bm[k:, :k]) @ P2)
            r21 = op_norm(A[k:, :k] - adj(Bm[:k, k:]) @ P1)
            rep.upper(f"{la}_12 = {lb}_21^H {names[piv]}_2", r12, tol * scale)
            rep.upper(f"{la}_21 = {lb}_12^H {names[piv]}_1", r21, tol * scale)
    th = np.linspace(0.0, 2 * np.pi, z_samples, endpoint=False)
    zs = np.exp(1j * th)
    seen = set()
    for (a, fa), (b, fb) in _PAIRS[tup.family]:
        key = tuple(sorted((a, b)))
        if key in seen:
            continue
        seen.add(key)
        A, Bm = B[a] * fa, B[b] * fb
        lam_min, corner, cross = np.inf, 0.0, 0.0
        for z1 in zs:
            for z2 in zs:
                Mz = _m_operator(A, Bm, P, z1, z2)
                lam_min = min(lam_min, float(np.linalg.eigvalsh(Mz)[0]))
                if k:
                    corner = max(corner, op_norm(Mz[:k, :k]))
                    if k < d:
                        cross = max(cross, op_norm(Mz[:k, k:]))
        lab = f"M({names[a]},{names[b]})"
        rep.lower(f"{lab} >= 0 on the (z1, z2) grid", lam_min, -tol)
        if k:
            rep.upper(f"{lab} corner block vanishes", corner, tol * scale)
        if 0 < k < d:
            rep.upper(f"{lab} off-diagonal block vanishes (PSD with zero corner)", cross, tol * scale)
    return rep
