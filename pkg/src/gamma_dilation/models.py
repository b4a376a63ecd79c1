"""Pure-isometry block-Toeplitz models, coefficient recovery, intertwining checks.

A symbol Phi(z) = C + L z acts on N copies of the coefficient space as
I kron C + S kron L, with S the truncated lower shift. Truncations of
lower-triangular Toeplitz operators multiply exactly, so every product
below is the truncation of the infinite one unless an adjoint appears.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, StructureError
from .fundamental import hypotheses_312, hypotheses_333
from .linalg import DEFAULT_TOL, adj, as_matrix, op_norm
from .report import CheckReport
from .tuples import OperatorPencil, OperatorTuple

# operator slot -> slot of its partner in M_i^H - M_partner M_z^H (None for the shift)
PARTNERS = {"gamma333": [5, 4, 3, 2, 1, 0, None], "gamma312": [4, 3, None, 1, 0]}
SHIFT_SLOT = {"gamma333": 6, "gamma312": 2}
UNVERIFIED = "unverified model"
VERIFIED = "verified"


def lower_shift(N):
    return np.eye(N, k=-1, dtype=complex)


def toeplitz_from_pencil(pencil: OperatorPencil, N):
    S = lower_shift(N)
    return np.kron(np.eye(N), pencil.constant) + np.kron(S, pencil.linear)


@dataclass
class ToeplitzModel:
    family: str
    coeff_dim: int
    depth: int
    symbols: list  # OperatorPencil per slot, None at the shift slot
    assembled: list
    status: str = VERIFIED
    hypotheses: CheckReport | None = None
    notes: list = field(default_factory=list)

    @property
    def shift_index(self):
        return SHIFT_SLOT[self.family]

    @property
    def interior_dim(self):
        return (self.depth - 1) * self.coeff_dim

    def as_tuple(self) -> OperatorTuple:
        return OperatorTuple(self.family, list(self.assembled), "toeplitz_model")


def _assemble(family, symbols, e, N):
    mats = []
    for sym in symbols:
        if sym is None:
            mats.append(np.kron(lower_shift(N), np.eye(e)))
        else:
            mats.append(toeplitz_from_pencil(sym, N))
    return mats


def _sup_norm_items(rep, pencils, z_samples, tol):
    th = np.linspace(0.0, 2 * np.pi, z_samples, endpoint=False)
    for name, C, L in pencils:
        stack = C[None] + np.exp(1j * th)[:, None, None] * L[None]
        nrm = float(np.max(np.linalg.norm(stack, 2, axis=(1, 2)))) if C.size else 0.0
        rep.upper(f"sup ||{name}|| <= 1", nrm, 1.0 + tol)


def _coeffs(mats, count, name):
    if len(mats) != count:
        raise InputError(f"{name} needs {count} coefficient matrices, got {len(mats)}")
    mats = [as_matrix(M, square=True) for M in mats]
    if len({M.shape for M in mats}) != 1:
        raise InputError("coefficient matrices must share one shape")
    return mats


def _check_depth(N):
    N = int(N)
    if N < 2:
        raise InputError("depth must be >= 2 (coefficient recovery needs two blocks)")
    return N


def build_pure_isometry_model_333(F, depth=8, tol=DEFAULT_TOL, z_samples=64) -> ToeplitzModel:
    """M_{Phi_i} with Phi_i(z) = F_i + F_{7-i}^H z, and M_z, on N copies of C^e."""
    F = _coeffs(F, 6, "gamma333 model")
    N = _check_depth(depth)
    e = F[0].shape[0]
    symbols = [OperatorPencil(F[i], adj(F[5 - i])) for i in range(6)] + [None]
    hyp = hypotheses_333(F, tol, title="model hypotheses (gamma333)")
    _sup_norm_items(hyp, [(f"F{i + 1} + F{6 - i}^H z", F[i], adj(F[5 - i])) for i in range(6)],
                    z_samples, tol)
    status = VERIFIED if hyp.passed else UNVERIFIED
    return ToeplitzModel("gamma333", e, N, symbols, _assemble("gamma333", symbols, e, N), status,
                         hyp)


def build_pure_isometry_model_312(G1, G2, Gt1, Gt2, depth=8, tol=DEFAULT_TOL,
                                  z_samples=64) -> ToeplitzModel:
    """Symbols G1 + Gt2^H z, 2G2 + 2Gt1^H z, z, 2Gt1 + 2G2^H z, Gt2 + G1^H z."""
    G1, G2, Gt1, Gt2 = _coeffs([G1, G2, Gt1, Gt2], 4, "gamma312 model")
    N = _check_depth(depth)
    e = G1.shape[0]
    symbols = [OperatorPencil(G1, adj(Gt2)), OperatorPencil(2 * G2, 2 * adj(Gt1)), None,
               OperatorPencil(2 * Gt1, 2 * adj(G2)), OperatorPencil(Gt2, adj(G1))]
    hyp = hypotheses_312(G1, G2, Gt1, Gt2, tol, title="model hypotheses (gamma312)")
    _sup_norm_items(hyp, [("G1 + Gt2^H z", G1, adj(Gt2)), ("Gt2 + G1^H z", Gt2, adj(G1)),
                          ("G2 + Gt1^H z", G2, adj(Gt1)), ("Gt1 + G2^H z", Gt1, adj(G2))],
                    z_samples, tol)
    status = VERIFIED if hyp.passed else UNVERIFIED
    return ToeplitzModel("gamma312", e, N, symbols, _assemble("gamma312", symbols, e, N), status,
                         hyp)


def recover_coefficients(model: ToeplitzModel, tol=1e-12, return_leakage=False):
    """Constants C_i from M_i^H - M_partner M_z^H = (I - S S^H) kron C_i^H.

    The right side lives on the first block only; anything elsewhere means
    the operators are not multiplication by linear pencils of this pairing.
    Returns the constants in slot order, skipping the shift (for gamma312:
    G1, 2 G2, 2 Gt1, Gt2).
    """
    if model.depth < 2:
        raise InputError("model depth must be >= 2")
    e = model.coeff_dim
    M = model.assembled
    Sz = M[model.shift_index]
    out, leaks = [], []
    for slot, partner in enumerate(PARTNERS[model.family]):
        if partner is None:
            continue
        X = adj(M[slot]) - M[partner] @ adj(Sz)
        head = X[:e, :e].copy()
        rest = X.copy()
        rest[:e, :e] = 0
        leak = op_norm(rest)
        scale = max(1.0, op_norm(M[slot]), op_norm(M[partner]))
        if leak > tol * scale:
            raise StructureError(f"slot {slot}: support leaks beyond the constants block "
                                 f"({leak:.3e})")
        out.append(adj(head))
        leaks.append(leak)
    return (out, leaks) if return_leakage else out


def block_toeplitz(coeffs, N):
    """Lower block-Toeplitz truncation of sum_k coeffs[k] z^k (rectangular blocks allowed)."""
    coeffs = [as_matrix(C) for C in coeffs]
    p, q = coeffs[0].shape
    M = np.zeros((N * p, N * q), dtype=complex)
    for k, C in enumerate(coeffs):
        for c in range(N - k):
            r = c + k
            M[r * p:(r + 1) * p, c * q:(c + 1) * q] = C
    return M


@dataclass
class BLHResult:
    psi: list  # OperatorPencil per slot (shift slot included)
    report: CheckReport
    Psi: list  # compressed matrices M_Theta^H M_Phi M_Theta


def theta_inner_defect(Theta, z_samples=64):
    """max over the z-grid of ||Theta(z)^H Theta(z) - I|| and the worst z."""
    th = np.linspace(0.0, 2 * np.pi, z_samples, endpoint=False)
    q = Theta[0].shape[1]
    worst, wz = 0.0, 1.0
    for t in th:
        z = np.exp(1j * t)
        V = sum(C * z ** k for k, C in enumerate(Theta))
        res = op_norm(adj(V) @ V - np.eye(q))
        if res > worst:
            worst, wz = res, z
    return worst, wz


class ThetaNotInnerError(InputError):
    def __init__(self, msg, z, residual):
        super().__init__(msg)
        self.z = z
        self.residual = residual


def blh_intertwine_check(model: ToeplitzModel, Theta, tol=1e-10, z_samples=64) -> BLHResult:
    """Compress every model operator by M_Theta and test that the result is a linear pencil.

    Psi_i = M_Theta^H M_Phi_i M_Theta is exact on block rows r <= N-1-k
    (k = deg Theta). On those rows we check that blocks above the diagonal
    vanish, that Toeplitz coefficients beyond degree one vanish, and that the
    diagonals are constant. The extracted pencils psi_i then must satisfy
    M_Theta M_psi_i = M_Phi_i M_Theta.
    """
    Theta = [as_matrix(C, "Theta coefficient") for C in Theta]
    if not Theta:
        raise InputError("Theta needs at least one coefficient")
    p, q = Theta[0].shape
    if p != model.coeff_dim or any(C.shape != (p, q) for C in Theta):
        raise InputError(f"Theta coefficients must be {model.coeff_dim} x q, consistently")
    k = len(Theta) - 1
    N = model.depth
    if N < k + 2:
        raise InputError(f"depth {N} < deg Theta + 2 = {k + 2}")
    res, wz = theta_inner_defect(Theta, z_samples)
    if res > tol:
        raise ThetaNotInnerError(f"Theta is not inner on the grid: residual {res:.3e} at z={wz:.6g}",
                                 wz, res)
    MT = block_toeplitz(Theta, N)
    rows = N - k  # exact block rows 0..N-1-k
    rep = CheckReport("BLH intertwining", options_used={"tol": tol, "z_samples": z_samples,
                                                        "exact_rows": rows, "theta_degree": k})
    psi, Psis = [], []
    for slot, M in enumerate(model.assembled):
        Psi = adj(MT) @ M @ MT
        Psis.append(Psi)

        def blk(r, c):
            return Psi[r * q:(r + 1) * q, c * q:(c + 1) * q]

        scale = max(1.0, op_norm(M))
        upper = max([op_norm(blk(r, c)) for r in range(rows) for c in range(r + 1, N)] + [0.0])
        high = max([op_norm(blk(r, c)) for r in range(rows) for c in range(max(r - 1, 0))] + [0.0])
        C0, C1 = blk(0, 0), blk(1, 0)
        drift = max([op_norm(blk(r, r) - C0) for r in range(rows)]
                    + [op_norm(blk(r, r - 1) - C1) for r in range(1, rows)] + [0.0])
        lab = f"slot {slot + 1}"
        rep.upper(f"{lab} analytic (upper blocks vanish)", upper, tol * scale)
        rep.upper(f"{lab} degree <= 1 (higher coefficients vanish)", high, tol * scale)
        rep.upper(f"{lab} Toeplitz (constant diagonals)", drift, tol * scale)
        pen = OperatorPencil(C0, C1)
        psi.append(pen)
        inter = MT @ toeplitz_from_pencil(pen, N) - M @ MT
        rep.upper(f"{lab} M_Theta M_psi = M_Phi M_Theta", op_norm(inter), tol * scale)
    return BLHResult(psi, rep, Psis)


def compress_model(model: ToeplitzModel, keep_blocks) -> OperatorTuple:
    """P_k M P_k on the first k coefficient blocks; a non-normal candidate tuple."""
    k = int(keep_blocks)
    if not 1 <= k < model.depth:
        raise InputError(f"keep_blocks must be in [1, {model.depth - 1}], got {keep_blocks}")
    n = k * model.coeff_dim
    tup = OperatorTuple(model.family, [M[:n, :n].copy() for M in model.assembled], "candidate")
    return tup
