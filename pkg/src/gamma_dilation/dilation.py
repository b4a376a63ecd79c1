"""Truncated Schaffer-type isometric dilations and co-isometric models.

The dilation space is H + D + D + ... with N copies of the defect space
(block 0 is H). Every operator is block lower bidiagonal. Products of such
truncations agree with the truncation of the infinite product, but
identities involving adjoints, such as V_7^H V_7 = I, only hold on the
leading d + (N-1) r coordinates: the last block column misses its
subdiagonal block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .fundamental import (FundamentalSet312, FundamentalSet333, check_dilation_hypotheses_312,
                          check_dilation_hypotheses_333)
from .linalg import DEFAULT_TOL, adj, commutator, op_norm
from .report import CheckReport
from .tuples import OperatorTuple

SCHAFFER = "schaffer_isometric"
COISOMETRIC = "coisometric_model"
DEFAULT_DEPTH = 8


@dataclass
class DilationTruncation:
    family: str
    base_dim: int
    defect_rank: int
    depth: int
    operators: OperatorTuple
    construction: str
    hypotheses: CheckReport | None = None
    notes: list = field(default_factory=list)

    @property
    def interior_dim(self):
        """Leading coordinates on which adjoint identities are exact."""
        return self.base_dim + max(self.depth - 1, 0) * self.defect_rank

    @property
    def dim(self):
        return self.base_dim + self.depth * self.defect_rank

    @property
    def verified(self):
        return self.hypotheses is None or self.hypotheses.passed

    @property
    def interior_depth(self):
        return self.depth - 1


def _banded(top, first_col, diag, sub, N, r, d):
    """Block lower-bidiagonal operator on H + D^N."""
    n = d + N * r
    M = np.zeros((n, n), dtype=complex)
    M[:d, :d] = top
    if r == 0:
        return M
    M[d:d + r, :d] = first_col
    for k in range(N):
        a = d + k * r
        M[a:a + r, a:a + r] = diag
        if k + 1 < N:
            M[a + r:a + 2 * r, a:a + r] = sub
    return M


def _shift(top, first_col, N, r, d):
    return _banded(top, first_col, np.zeros((r, r)), np.eye(r), N, r, d)


def _depth(N):
    N = int(N)
    if N < 1:
        raise InputError(f"depth must be >= 1, got {N}")
    return N


def build_schaffer_333(tup: OperatorTuple, fset: FundamentalSet333, depth=DEFAULT_DEPTH,
                       tol=DEFAULT_TOL) -> DilationTruncation:
    """V_i = [[T_i, 0], [F_{7-i}^H D, F_i, 0], [0, F_{7-i}^H, F_i], ...], V_7 the Schaffer shift.

    Every block below the first row is written in the eigenbasis of the
    defect, so D enters as Lam Q^H.
    """
    if tup.family != "gamma333":
        raise InputError("build_schaffer_333 needs a gamma333 tuple")
    N = _depth(depth)
    dd = fset.defect
    d, r = tup.dim, dd.rank
    DQ = dd.to_basis()
    T = tup.operators
    hyp = check_dilation_hypotheses_333(fset, tol)
    ops = []
    for i in range(6):
        Fi = fset.F[i] if r else np.zeros((0, 0))
        Fp = fset.F[5 - i] if r else np.zeros((0, 0))
        ops.append(_banded(T[i], adj(Fp) @ DQ, Fi, adj(Fp), N, r, d))
    ops.append(_shift(T[6], DQ, N, r, d))
    dil = DilationTruncation("gamma333", d, r, N, OperatorTuple("gamma333", ops, SCHAFFER),
                             SCHAFFER, hyp)
    if not hyp.passed:
        dil.notes.append("hypotheses (i)/(ii) fail: matrices built but unverified")
    if not fset.consistent:
        dil.notes.append("fundamental set inconsistent")
    return dil


def build_schaffer_312(tup: OperatorTuple, gset: FundamentalSet312, depth=DEFAULT_DEPTH,
                       tol=DEFAULT_TOL) -> DilationTruncation:
    """W1 (G1, Gt2^H), W2 (2G2, 2Gt1^H), W3 shift, Wt1 (2Gt1, 2G2^H), Wt2 (Gt2, G1^H)."""
    if tup.family != "gamma312":
        raise InputError("build_schaffer_312 needs a gamma312 tuple")
    N = _depth(depth)
    dd = gset.defect
    d, r = tup.dim, dd.rank
    DQ = dd.to_basis()
    S1, S2, S3, St1, St2 = tup.operators
    z = np.zeros((r, r), dtype=complex)
    G1, G2, Gt1, Gt2 = ((gset.G1, gset.G2, gset.Gt1, gset.Gt2) if r else (z, z, z, z))
    hyp = check_dilation_hypotheses_312(gset, tol)
    spec = [(S1, G1, adj(Gt2)), (S2, 2 * G2, 2 * adj(Gt1)), None,
            (St1, 2 * Gt1, 2 * adj(G2)), (St2, Gt2, adj(G1))]
    ops = []
    for item in spec:
        if item is None:
            ops.append(_shift(S3, DQ, N, r, d))
        else:
            top, dg, sb = item
            ops.append(_banded(top, sb @ DQ, dg, sb, N, r, d))
    dil = DilationTruncation("gamma312", d, r, N, OperatorTuple("gamma312", ops, SCHAFFER),
                             SCHAFFER, hyp)
    if not hyp.passed:
        dil.notes.append("hypotheses (i)/(ii) fail: matrices built but unverified")
    if not gset.consistent:
        dil.notes.append("fundamental set inconsistent")
    return dil


def _coisometric(dil_of_adjoint: DilationTruncation):
    ops = dil_of_adjoint.operators.adjoint()
    ops.tag = COISOMETRIC
    return DilationTruncation(dil_of_adjoint.family, dil_of_adjoint.base_dim,
                              dil_of_adjoint.defect_rank, dil_of_adjoint.depth, ops, COISOMETRIC,
                              dil_of_adjoint.hypotheses, list(dil_of_adjoint.notes))


def build_coisometric_333(tup: OperatorTuple, fset_of_adjoint: FundamentalSet333,
                          depth=DEFAULT_DEPTH, tol=DEFAULT_TOL) -> DilationTruncation:
    """Upper-banded model: top row (T_i, D_{T7^H} F_{7-i}), diagonal F_i^H, superdiagonal F_{7-i}.

    It is the adjoint of the Schaffer dilation of the adjoint tuple, with F
    the fundamental operators of that adjoint tuple.
    """
    return _coisometric(build_schaffer_333(tup.adjoint(), fset_of_adjoint, depth, tol))


def build_coisometric_312(tup: OperatorTuple, gset_of_adjoint: FundamentalSet312,
                          depth=DEFAULT_DEPTH, tol=DEFAULT_TOL) -> DilationTruncation:
    return _coisometric(build_schaffer_312(tup.adjoint(), gset_of_adjoint, depth, tol))


DIL_NAMES = {"gamma333": tuple(f"V{i}" for i in range(1, 8)),
             "gamma312": ("W1", "W2", "W3", "Wt1", "Wt2")}
PAIRS = {"gamma333": ([(i, 5 - i) for i in range(6)], 6),
         "gamma312": ([(0, 4), (1, 3), (3, 1), (4, 0)], 2)}


def _word_product(ops, word, n):
    P = np.eye(n, dtype=complex)
    for k in word:
        P = P @ ops[k]
    return P


def verify_dilation(dil: DilationTruncation, source: OperatorTuple, poly_degree=3, trials=20,
                    seed=0, tol=1e-9) -> CheckReport:
    """Compression, isometry relations and commutators of a truncated dilation.

    Co-isometric models are verified through their adjoint, which is an
    isometric construction for the adjoint source tuple.
    """
    if dil.family != source.family:
        raise InputError("dilation and source belong to different families")
    coiso = dil.construction == COISOMETRIC
    V = dil.operators.adjoint().operators if coiso else dil.operators.operators
    T = source.adjoint().operators if coiso else source.operators
    d, n, k = dil.base_dim, dil.dim, dil.interior_dim
    if V[0].shape[0] != n or T[0].shape[0] != d:
        raise InputError("dilation shape does not match source dimension and depth")
    pre = "adjoint: " if coiso else ""
    opts = {"poly_degree": poly_degree, "trials": trials, "seed": seed, "tol": tol,
            "depth": dil.depth, "interior_dim": k, "construction": dil.construction}
    rep = CheckReport("dilation contract", options_used=opts)
    scale = max([1.0] + [op_norm(M) for M in V])

    # H is co-invariant for the lower-banded construction
    leak = max(op_norm(M[:d, d:]) if n > d else 0.0 for M in V)
    rep.upper(f"{pre}H co-invariant (top-right blocks vanish)", leak, tol)

    rng = np.random.default_rng(seed)
    worst, wit = 0.0, None
    for _ in range(trials):
        m = int(rng.integers(1, poly_degree + 1))
        word = [int(x) for x in rng.integers(0, len(V), size=m)]
        big = _word_product(V, word, n)
        small = _word_product(T, word, d)
        res = op_norm(big[:d, :d] - small) / scale ** m
        if res >= worst:
            worst, wit = res, {"word": word}
    rep.upper(f"{pre}compression P_H p(V)|_H = p(T)", worst, tol, witness=wit)

    pairs, piv = PAIRS[dil.family]
    P = V[piv]
    names = DIL_NAMES[dil.family]
    full_res = []
    for a, b in pairs:
        R = V[a] - adj(V[b]) @ P
        rep.upper(f"{pre}{names[a]} = {names[b]}^H {names[piv]} (interior)", op_norm(R[:k, :k]),
                  tol * scale * scale)
        full_res.append(op_norm(R))
    G = adj(P) @ P - np.eye(n)
    rep.upper(f"{pre}{names[piv]}^H {names[piv]} = I (interior)", op_norm(G[:k, :k]), tol)
    full_res.append(op_norm(G))
    worst, wit = 0.0, None
    for i in range(len(V)):
        for j in range(i + 1, len(V)):
            c = op_norm(commutator(V[i], V[j])[:k, :k])
            if c >= worst:
                worst, wit = c, {"pair": [names[i], names[j]]}
    rep.upper(f"{pre}commutators (interior)", worst, tol * scale * scale, witness=wit)
    rep.notes.append(f"boundary-inclusive isometry residual {max(full_res):.3e} "
                     "(truncation boundary, not a violation)")
    if dil.hypotheses is not None and not dil.hypotheses.passed:
        rep.notes.append("source fundamental operators fail the dilation hypotheses")
    return rep
