"""Operator functions rho and the necessary-condition batteries.

Every battery here checks conditions that a Gamma-contraction (isometry,
unitary) must satisfy. Passing them is evidence, never a proof: the report
vocabulary is "consistent" / "violated".
"""

from __future__ import annotations

import numpy as np

from .errors import DiagonalizationError, InputError, NotContractionError
from .geometry import in_K, in_K1
from .linalg import (DEFAULT_TOL, _golden_max, adj, as_matrix, hermitian_part, numerical_radius,
                     numerical_radius_batch, numerical_radius_grid_error, op_norm, spectral_radius)
from .report import CheckReport
from .tuples import OperatorTuple

NECESSARY = "necessary condition"
BIDISC_ALPHAS = (0.5, 0.8, 1.0)


def _same_shape(*mats):
    mats = [as_matrix(M, square=True) for M in mats]
    if len({M.shape for M in mats}) != 1:
        raise InputError(f"shape mismatch: {[M.shape for M in mats]}")
    return mats


def rho_tetra(T1, T2, T3):
    """(I - T3^H T3) + (T2^H T2 - T1^H T1) - 2 Re(T2 - T1^H T3).

    For scalars this is |1 - t2|^2 - |t1 - t3|^2, so it is >= 0 exactly when
    the Moebius-type map (t3 z - t1)/(t2 z - 1) is bounded by one.
    """
    T1, T2, T3 = _same_shape(T1, T2, T3)
    n = T1.shape[0]
    K = T2 - adj(T1) @ T3
    R = (np.eye(n) - adj(T3) @ T3) + (adj(T2) @ T2 - adj(T1) @ T1) - (K + adj(K))
    return hermitian_part(R)


def rho_sym_bidisc(S, P):
    """2(I - P^H P) - (S - S^H P) - (S - S^H P)^H."""
    S, P = _same_shape(S, P)
    n = S.shape[0]
    K = S - adj(S) @ P
    return hermitian_part(2 * (np.eye(n) - adj(P) @ P) - K - adj(K))


def z_grid(n):
    return np.linspace(0.0, 2 * np.pi, int(n), endpoint=False)


def _circle_extreme(f, n, mode, refine=True):
    """Extreme over the unit circle of a vectorized f(thetas) -> values.

    Uniform grid then golden-section search in the neighbouring cells of the
    worst sample. Returns (value, theta).
    """
    th = z_grid(n)
    vals = f(th)
    sign = 1.0 if mode == "max" else -1.0
    k = int(np.argmax(sign * vals))
    best_t, best = th[k], float(vals[k])
    if refine:
        h = 2 * np.pi / n
        t, v = _golden_max(lambda t: sign * float(f(np.array([t]))[0]), best_t - h, best_t + h)
        if sign * v > sign * best:
            best_t, best = t, sign * v
    return best, float(best_t % (2 * np.pi))


def _rho_pencil_min(A, B, P, n, refine=True):
    """min over z in T of lambda_min rho_tetra(A, zB, zP)."""
    d = A.shape[0]
    H0 = np.eye(d) - adj(P) @ P + adj(B) @ B - adj(A) @ A
    K = B - adj(A) @ P

    def f(th):
        z = np.exp(1j * th)[:, None, None]
        R = H0[None] - (z * K[None] + np.conj(z) * adj(K)[None])
        return np.linalg.eigvalsh(hermitian_part(R))[:, 0]

    return _circle_extreme(f, n, "min", refine)


def _rho_pencil_absmax(A, B, P, n, refine=True):
    """max over z of the spectral norm of rho_tetra(A, zB, zP) (Hermitian, so max |eig|)."""
    d = A.shape[0]
    H0 = np.eye(d) - adj(P) @ P + adj(B) @ B - adj(A) @ A
    K = B - adj(A) @ P

    def f(th):
        z = np.exp(1j * th)[:, None, None]
        R = H0[None] - (z * K[None] + np.conj(z) * adj(K)[None])
        return np.max(np.abs(np.linalg.eigvalsh(hermitian_part(R))), axis=1)

    return _circle_extreme(f, n, "max", refine)


def _pencil_radius_max(X, Y, n, refine=True):
    """max over z of r(X + zY)."""
    def f(th):
        z = np.exp(1j * th)[:, None, None]
        return np.max(np.abs(np.linalg.eigvals(X[None] + z * Y[None])), axis=1)

    return _circle_extreme(f, n, "max", refine)


def _bidisc_min(X, Y, P, alpha, n, refine=True):
    """min over z of lambda_min rho_sym_bidisc(alpha (X + zY), alpha^2 z P)."""
    d = X.shape[0]

    def f(th):
        z = np.exp(1j * th)[:, None, None]
        S = alpha * (X[None] + z * Y[None])
        Pz = alpha ** 2 * z * P[None]
        K = S - adj(S) @ Pz
        R = 2 * (np.eye(d)[None] - adj(Pz) @ Pz) - K - adj(K)
        return np.linalg.eigvalsh(hermitian_part(R))[:, 0]

    return _circle_extreme(f, n, "min", refine)


def _omega_pencil_max(X, Y, n, angular_samples=256):
    """max over the z-grid of omega(X + zY), refined at the worst grid point."""
    th = z_grid(n)
    stack = X[None] + np.exp(1j * th)[:, None, None] * Y[None]
    # coarse screen; a z whose coarse value plus its grid error cannot reach the
    # best fine value found so far cannot hold the fine-grid maximum
    coarse_n = max(angular_samples // 4, 8)
    coarse, _ = numerical_radius_batch(stack, coarse_n)
    slack = np.linalg.norm(stack, 2, axis=(1, 2)) * (1.0 - np.cos(np.pi / coarse_n))
    first = int(np.argmax(coarse))
    best = numerical_radius_batch(stack[first:first + 1], angular_samples)[0][0]
    live = np.flatnonzero(coarse + slack >= best)
    vals = np.full(len(th), -np.inf)
    vals[live] = numerical_radius_batch(stack[live], angular_samples)[0]
    k = int(np.argmax(vals))
    w = numerical_radius(stack[k], angular_samples)
    return max(float(vals[k]), w), float(th[k])


def _prepare(tup, family, tol):
    if not isinstance(tup, OperatorTuple) or tup.family != family:
        raise InputError(f"expected an OperatorTuple of family {family}")
    worst = tup.require_commuting(tol)
    return worst


def _pivot_contraction(P, name, tol):
    nrm = op_norm(P)
    if nrm > 1 + tol:
        raise NotContractionError(f"{name} is not a contraction: norm {nrm:.6g}", nrm)


def _tetra_items(rep, label, A, B, P, names, n, tol, refine):
    """Norms plus both rho pencils for one induced tetrablock triple."""
    a, b, p = names
    for nm, M in ((a, A), (b, B)):
        rep.upper(f"{label} ||{nm}|| <= 1", op_norm(M), 1.0 + tol, note=NECESSARY)
    v, t = _rho_pencil_min(A, B, P, n, refine)
    rep.lower(f"{label} rho({a}, z{b}, z{p}) >= 0", v, -tol, witness={"theta": t}, note=NECESSARY)
    v, t = _rho_pencil_min(B, A, P, n, refine)
    rep.lower(f"{label} rho({b}, z{a}, z{p}) >= 0", v, -tol, witness={"theta": t}, note=NECESSARY)


def _bidisc_items(rep, label, X, Y, P, n, tol, refine):
    worst, wit = np.inf, None
    for alpha in BIDISC_ALPHAS:
        v, t = _bidisc_min(X, Y, P, alpha, n, refine)
        if v < worst:
            worst, wit = v, {"theta": t, "alpha": alpha}
    rep.lower(f"{label} rho_bidisc(a S_z, a^2 P_z) >= 0", worst, -tol, witness=wit,
              note="stand-in for the symmetrized-bidisc contraction property of (S_z, P_z)")


def check_gamma333(tup: OperatorTuple, z_samples=64, tol=DEFAULT_TOL, refine=True,
                   fset=None) -> CheckReport:
    """Necessary-condition battery for a 7-tuple.

    For i = 1..6: norms, both rho_tetra pencils, r(T_i + z T_{7-i}) <= 2, the
    bidisc stand-in, and omega(F_i + z F_{7-i}) <= 1 from the fundamental
    operators.
    """
    from .fundamental import solve_fundamental_333

    worst = _prepare(tup, "gamma333", tol)
    T = tup.operators
    _pivot_contraction(T[6], "T7", tol)
    opts = {"z_samples": z_samples, "tol": tol, "refine": refine}
    rep = CheckReport("gamma333 necessary conditions", options_used=opts)
    rep.upper("commutators", worst, tol)
    rep.upper("||T7|| <= 1", op_norm(T[6]), 1.0 + tol, note=NECESSARY)
    for i in range(6):
        j = 5 - i
        nm = (f"T{i + 1}", f"T{j + 1}", "T7")
        if i < j:
            _tetra_items(rep, f"[{i + 1},{j + 1}]", T[i], T[j], T[6], nm, z_samples, tol, refine)
        v, t = _pencil_radius_max(T[i], T[j], z_samples, refine)
        rep.upper(f"r(T{i + 1} + zT{j + 1}) <= 2", v, 2.0 + tol, witness={"theta": t}, note=NECESSARY)
        if i < j:
            _bidisc_items(rep, f"[{i + 1},{j + 1}]", T[i], T[j], T[6], z_samples, tol, refine)
    if fset is None:
        fset = solve_fundamental_333(tup, tol, check_commuting=False)
    _omega_items(rep, fset, [(f"F{i + 1}", f"F{6 - i}", fset.F[i] if fset.rank else None,
                              fset.F[5 - i] if fset.rank else None) for i in range(6)],
                 z_samples, tol)
    return rep


def _omega_items(rep, fset, pencils, n, tol, angular_samples=256):
    if not fset.consistent:
        rep.upper("fundamental equations solvable", max(fset.residuals), tol * fset.scale,
                  note=NECESSARY)
        return
    rep.notes.extend(fset.warnings)
    for a, b, X, Y in pencils:
        name = f"w({a} + z{b}) <= 1"
        if fset.rank == 0:
            rep.skip(name, "defect space is zero")
            continue
        v, t = _omega_pencil_max(X, Y, n, angular_samples)
        err = numerical_radius_grid_error(X + np.exp(1j * t) * Y, angular_samples)
        rep.upper(name, v, 1.0 + tol + err, witness={"theta": t}, note=NECESSARY)


def check_gamma312(tup: OperatorTuple, z_samples=64, tol=DEFAULT_TOL, refine=True,
                   gset=None) -> CheckReport:
    """Necessary-condition battery for a 5-tuple (S1, S2, S3, St1, St2)."""
    from .fundamental import solve_fundamental_312

    worst = _prepare(tup, "gamma312", tol)
    S1, S2, S3, St1, St2 = tup.operators
    _pivot_contraction(S3, "S3", tol)
    opts = {"z_samples": z_samples, "tol": tol, "refine": refine}
    rep = CheckReport("gamma312 necessary conditions", options_used=opts)
    rep.upper("commutators", worst, tol)
    rep.upper("||S3|| <= 1", op_norm(S3), 1.0 + tol, note=NECESSARY)
    _tetra_items(rep, "(S1,St2,S3)", S1, St2, S3, ("S1", "St2", "S3"), z_samples, tol, refine)
    _tetra_items(rep, "(S2/2,St1/2,S3)", S2 / 2, St1 / 2, S3, ("S2/2", "St1/2", "S3"),
                 z_samples, tol, refine)
    v, t = _pencil_radius_max(S1, St2, z_samples, refine)
    rep.upper("r(S1 + zSt2) <= 2", v, 2.0 + tol, witness={"theta": t}, note=NECESSARY)
    v, t = _pencil_radius_max(S2 / 2, St1 / 2, z_samples, refine)
    rep.upper("r(S2/2 + zSt1/2) <= 2", v, 2.0 + tol, witness={"theta": t}, note=NECESSARY)
    _bidisc_items(rep, "(S1,St2)", S1, St2, S3, z_samples, tol, refine)
    _bidisc_items(rep, "(S2/2,St1/2)", S2 / 2, St1 / 2, S3, z_samples, tol, refine)
    if gset is None:
        gset = solve_fundamental_312(tup, tol, check_commuting=False)
    r = gset.rank
    _omega_items(rep, gset, [("G1", "Gt2", gset.G1 if r else None, gset.Gt2 if r else None),
                             ("G2", "Gt1", gset.G2 if r else None, gset.Gt1 if r else None)],
                 z_samples, tol)
    return rep


def _interior(M, k):
    return M if k is None else M[:k, :k]


def _isometry_common(rep, ops, names, pivot, pairs, scaled, tol, interior, z_samples, refine):
    """pivot^H pivot = I, norm/radius bounds, V_a = V_b^H V_pivot, rho pencils vanish."""
    V = ops
    P = V[pivot]
    k = interior
    d = P.shape[0]
    kk = d if k is None else k
    rep.upper(f"{names[pivot]}^H {names[pivot]} = I",
              op_norm(_interior(adj(P) @ P, k) - np.eye(kk)), tol)
    for idx, fac in scaled:
        M = V[idx] * fac
        lab = names[idx] if fac == 1 else f"{names[idx]}/{int(round(1 / fac))}"
        rep.upper(f"||{lab}|| <= 1", op_norm(M), 1.0 + tol)
        rep.upper(f"r({lab}) <= 1", spectral_radius(M), 1.0 + tol)
    for a, b in pairs:
        res = op_norm(_interior(V[a] - adj(V[b]) @ P, k))
        rep.upper(f"{names[a]} = {names[b]}^H {names[pivot]}", res,
                  tol * max(1.0, op_norm(V[a]), op_norm(V[b])))


def check_isometry333(tup: OperatorTuple, tol=DEFAULT_TOL, z_samples=64, interior=None,
                      refine=True) -> CheckReport:
    """Gamma-isometry relations; ``interior`` restricts to a leading principal block.

    Products of block lower-triangular truncations are exact on the leading
    columns whose subdiagonal blocks are present, so dilations and Toeplitz
    models are checked on that interior.
    """
    worst = _prepare(tup, "gamma333", tol)
    V = tup.operators
    opts = {"tol": tol, "z_samples": z_samples, "interior": interior}
    rep = CheckReport("gamma333 isometry relations", options_used=opts)
    rep.upper("commutators", worst, tol)
    _isometry_common(rep, V, tup.names, 6, [(i, 5 - i) for i in range(6)],
                     [(i, 1.0) for i in range(6)], tol, interior, z_samples, refine)
    for i in range(6):
        j = 5 - i
        v, t = _rho_any(V[i], V[j], V[6], interior, z_samples, refine)
        rep.upper(f"rho(V{i + 1}, zV{j + 1}, zV7) = 0", v, tol, witness={"theta": t})
    return rep


def _rho_cols_absmax(A, B, P, n, refine=True):
    """As _rho_pencil_absmax for tall column blocks A, B, P (only X^H Y products appear)."""
    k = A.shape[1]
    H0 = np.eye(k) - adj(P) @ P + adj(B) @ B - adj(A) @ A
    # the linear part B - A^H P needs B restricted to the leading k rows
    K = B[:k] - adj(A) @ P

    def f(th):
        z = np.exp(1j * th)[:, None, None]
        R = H0[None] - (z * K[None] + np.conj(z) * adj(K)[None])
        return np.max(np.abs(np.linalg.eigvalsh(hermitian_part(R))), axis=1)

    return _circle_extreme(f, n, "max", refine)


def check_isometry312(tup: OperatorTuple, tol=DEFAULT_TOL, z_samples=64, interior=None,
                      refine=True) -> CheckReport:
    worst = _prepare(tup, "gamma312", tol)
    W = tup.operators
    opts = {"tol": tol, "z_samples": z_samples, "interior": interior}
    rep = CheckReport("gamma312 isometry relations", options_used=opts)
    rep.upper("commutators", worst, tol)
    # W1 = Wt2^H W3, W2 = Wt1^H W3 (indices: S1=0, S2=1, S3=2, St1=3, St2=4)
    _isometry_common(rep, W, tup.names, 2, [(0, 4), (1, 3)],
                     [(0, 1.0), (1, 0.5), (3, 0.5), (4, 1.0)], tol, interior, z_samples, refine)
    for label, a, b in (("W1, zWt2, zW3", W[0], W[4]), ("W2/2, zWt1/2, zW3", W[1] / 2, W[3] / 2)):
        v, t = _rho_any(a, b, W[2], interior, z_samples, refine)
        rep.upper(f"rho({label}) = 0", v, tol, witness={"theta": t})
    return rep


def _rho_any(A, B, P, k, n, refine):
    if k is None:
        return _rho_pencil_absmax(A, B, P, n, refine)
    return _rho_cols_absmax(A[:, :k], B[:, :k], P[:, :k], n, refine)


def joint_diagonalize(mats, seed=0, gap=1e-6, tol=DEFAULT_TOL):
    """Simultaneous unitary diagonalization of a commuting normal family.

    A random real combination of the Hermitian and skew parts separates the
    joint eigenspaces generically. Eigenvalues are clustered at relative gap
    ``gap``; on each cluster every matrix must act as a scalar.
    Returns (blocks, joint_eigenvalues) with one entry per cluster.
    """
    mats = [as_matrix(M, square=True) for M in mats]
    n = mats[0].shape[0]
    rng = np.random.default_rng(seed)
    coef = rng.standard_normal((len(mats), 2))
    H = np.zeros((n, n), dtype=complex)
    for (a, b), M in zip(coef, mats):
        H += a * hermitian_part(M) + b * hermitian_part(-1j * M)
    w, Q = np.linalg.eigh(hermitian_part(H))
    span = max(1.0, float(np.max(np.abs(w))) if n else 1.0)
    cuts = np.flatnonzero(np.diff(w) > gap * span) + 1
    groups = np.split(np.arange(n), cuts)
    scale = max([1.0] + [op_norm(M) for M in mats])
    blocks, eigs = [], []
    for g in groups:
        Qc = Q[:, g]
        lam = []
        for M in mats:
            MQ = M @ Qc
            mu = np.trace(adj(Qc) @ MQ) / len(g)
            res = op_norm(MQ - mu * Qc)
            if res > max(tol, 1e3 * gap) * scale:
                raise DiagonalizationError(
                    f"cluster of size {len(g)} is not a joint eigenspace (residual {res:.2e}); "
                    f"try a different seed or a smaller gap")
            lam.append(mu)
        blocks.append(Qc)
        eigs.append(np.array(lam))
    return blocks, eigs


def _unitary_battery(tup, tol, seed, pivot, pairs, member_fn, title):
    worst = _prepare(tup, tup.family, tol)
    N = tup.operators
    names = tup.names
    rep = CheckReport(title, options_used={"tol": tol, "seed": seed})
    rep.upper("commutators", worst, tol)
    normal_ok = True
    for nm, M in zip(names, N):
        res = op_norm(adj(M) @ M - M @ adj(M))
        it = rep.upper(f"{nm} normal", res, tol * max(1.0, op_norm(M)) ** 2)
        normal_ok &= it.status == "pass"
    P = N[pivot]
    d = P.shape[0]
    rep.upper(f"{names[pivot]} unitary", op_norm(adj(P) @ P - np.eye(d)), tol)
    for a, b in pairs:
        rep.upper(f"{names[a]} = {names[b]}^H {names[pivot]}", op_norm(N[a] - adj(N[b]) @ P),
                  tol * max(1.0, op_norm(N[a]), op_norm(N[b])))
    if not normal_ok:
        rep.skip("joint spectrum", "family is not normal; joint diagonalization not attempted")
        return rep
    _, eigs = joint_diagonalize(N, seed=seed, tol=max(tol, 1e-10))
    worst_m, wit = np.inf, None
    for lam in eigs:
        sub = member_fn(lam, tol)
        m = sub.worst_margin()
        if m < worst_m:
            worst_m, wit = m, {"joint_eigenvalue": lam}
    it = rep.lower("joint spectrum on the distinguished boundary", worst_m, 0.0, witness=wit)
    it.note = f"{len(eigs)} joint eigenvalue(s)"
    return rep


def check_unitary333(tup: OperatorTuple, tol=DEFAULT_TOL, seed=0) -> CheckReport:
    if tup.family != "gamma333":
        raise InputError("check_unitary333 needs a gamma333 tuple")
    return _unitary_battery(tup, tol, seed, 6, [(i, 5 - i) for i in range(6)], in_K,
                            "gamma333 unitary conditions")


def check_unitary312(tup: OperatorTuple, tol=DEFAULT_TOL, seed=0) -> CheckReport:
    if tup.family != "gamma312":
        raise InputError("check_unitary312 needs a gamma312 tuple")
    return _unitary_battery(tup, tol, seed, 2, [(0, 4), (1, 3)], in_K1,
                            "gamma312 unitary conditions")


CHECKS = {
    "gamma333": check_gamma333,
    "gamma312": check_gamma312,
}
