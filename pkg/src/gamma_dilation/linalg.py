"""Dense complex linear-algebra primitives: norms, radii, Hermitian calculus, defects."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NotContractionError, NotPSDError
from .report import CheckReport

DEFAULT_TOL = 1e-8
EPS = np.finfo(float).eps


def as_matrix(M, name="matrix", square=False):
    """Return ``M`` as a finite complex128 2-D array, raising InputError otherwise."""
    A = np.asarray(M, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError(f"{name} has non-finite entries")
    if square and A.shape[0] != A.shape[1]:
        raise InputError(f"{name} must be square, got shape {A.shape}")
    return A


def adj(M):
    return np.conj(np.swapaxes(M, -1, -2))


def hermitian_part(M):
    return 0.5 * (M + adj(M))


def op_norm(M) -> float:
    M = as_matrix(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def spectral_radius(M) -> float:
    M = as_matrix(M, square=True)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


@dataclass
class HermitianSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ adj(Q)


def hermitian_spectrum(M, tol=DEFAULT_TOL) -> HermitianSpectrum:
    """Ascending eigendecomposition of a Hermitian matrix (symmetrized first)."""
    M = as_matrix(M, square=True)
    skew = op_norm(M - adj(M))
    if skew > tol * max(1.0, op_norm(M)):
        raise InputError(f"matrix is not Hermitian (skew part norm {skew:.3e})")
    w, Q = np.linalg.eigh(hermitian_part(M))
    return HermitianSpectrum(w, Q)


def _theta_profile(M, thetas):
    """lambda_max of Re(e^{i theta} M) for every theta; shape (len(thetas),)."""
    rot = np.exp(1j * np.asarray(thetas))[:, None, None] * M[None]
    return np.linalg.eigvalsh(hermitian_part(rot))[:, -1]


def numerical_radius_grid_error(M, angular_samples=256) -> float:
    """Worst-case underestimate of the unrefined grid maximum."""
    return op_norm(M) * (1.0 - np.cos(np.pi / angular_samples))


def _golden_max(f, a, b, iters=60):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a < 1e-13:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc > fd else (d, fd)


def numerical_radius(M, angular_samples=256, refine=True, return_theta=False):
    """Numerical radius via max over theta of lambda_max(Re(e^{i theta} M)).

    omega(M) <= 1 iff Re(zM) <= I for all unimodular z, so the radius is the
    largest top eigenvalue of the rotated Hermitian parts. A uniform grid
    locates the best angle and golden-section search polishes it.
    """
    M = as_matrix(M, square=True)
    if angular_samples < 8:
        raise InputError("angular_samples must be >= 8")
    if M.size == 0 or not np.any(M):
        return (0.0, 0.0) if return_theta else 0.0
    thetas = np.linspace(0.0, 2 * np.pi, angular_samples, endpoint=False)
    prof = _theta_profile(M, thetas)
    k = int(np.argmax(prof))
    best_t, best = thetas[k], float(prof[k])
    if refine:
        h = 2 * np.pi / angular_samples
        t, val = _golden_max(lambda t: float(_theta_profile(M, [t])[0]), best_t - h, best_t + h)
        if val > best:
            best_t, best = t, val
    best = max(best, 0.0)
    return (best, float(best_t % (2 * np.pi))) if return_theta else best


def numerical_radius_batch(Ms, angular_samples=256):
    """Grid-only numerical radii of a stack of matrices, shape (k, n, n) -> (k,)."""
    Ms = np.asarray(Ms, dtype=complex)
    thetas = np.linspace(0.0, 2 * np.pi, angular_samples, endpoint=False)
    rot = np.exp(1j * thetas)[None, :, None, None] * Ms[:, None]
    top = np.linalg.eigvalsh(hermitian_part(rot))[..., -1]
    return np.maximum(top.max(axis=1), 0.0), thetas[np.argmax(top, axis=1)]


def psd_sqrt(M, tol=DEFAULT_TOL):
    """Hermitian PSD square root, clamping eigenvalues in [-tol, 0) to zero."""
    M = as_matrix(M, square=True)
    if M.size == 0:
        return M.copy()
    skew = op_norm(M - adj(M))
    if skew > tol * max(1.0, op_norm(M)):
        raise InputError(f"matrix is not Hermitian (skew part norm {skew:.3e})")
    w, Q = np.linalg.eigh(hermitian_part(M))
    if w[0] < -tol:
        raise NotPSDError(f"matrix is not PSD: min eigenvalue {w[0]:.3e} < -{tol:.1e}", float(w[0]))
    root = np.sqrt(np.clip(w, 0.0, None))
    R = (Q * root) @ adj(Q)
    return hermitian_part(R)


@dataclass
class DefectData:
    defect: np.ndarray
    basis: np.ndarray
    rank: int
    tolerance_used: float
    eigenvalues: np.ndarray  # positive defect eigenvalues matching basis columns

    @property
    def dim(self):
        return self.defect.shape[0]

    def to_basis(self):
        """D_T as a (rank x dim) map onto the defect-space coordinates: Lambda Q^H."""
        return self.eigenvalues[:, None] * adj(self.basis)

    def expand(self, F):
        """Lift a rank x rank operator on the defect space to the full space."""
        return self.basis @ F @ adj(self.basis)


def rank_cutoff(gram_eigs, dim):
    """Threshold on eigenvalues of I - T^H T below which a direction is isometric.

    The decision is taken on the squared defect: the square root turns
    rounding noise of size eps into sqrt(eps), which no relative cutoff on
    D_T itself can separate from genuine small defects.
    """
    top = float(np.max(gram_eigs)) if len(gram_eigs) else 0.0
    return 16 * max(dim, 1) * EPS * max(1.0, top)


def defect(T, tol=DEFAULT_TOL, cutoff=None) -> DefectData:
    """Defect operator (I - T^H T)^{1/2} with an isometric basis of its range."""
    T = as_matrix(T, "T", square=True)
    d = T.shape[0]
    nrm = op_norm(T)
    if nrm > 1 + tol:
        raise NotContractionError(f"not a contraction: norm {nrm:.6g} > 1 + {tol:.1e}", nrm)
    G = np.eye(d) - adj(T) @ T
    w, Q = np.linalg.eigh(hermitian_part(G))
    w = np.clip(w, 0.0, None)
    thr = rank_cutoff(w, d) if cutoff is None else cutoff
    keep = w > thr
    dvals = np.where(keep, np.sqrt(w), 0.0)
    D = hermitian_part((Q * dvals) @ adj(Q))
    order = np.argsort(-dvals[keep], kind="stable")
    basis = Q[:, keep][:, order]
    return DefectData(D, basis, int(keep.sum()), float(thr), dvals[keep][order])


def commutator(A, B):
    return A @ B - B @ A


def commutator_report(mats, tol=DEFAULT_TOL, names=None) -> CheckReport:
    """Pairwise commutator residuals; pass iff each <= tol * max(1, |A||B|)."""
    mats = [as_matrix(M, square=True) for M in mats]
    if len({M.shape for M in mats}) > 1:
        raise InputError("commutator_report: dimension mismatch")
    names = names or [f"M{i + 1}" for i in range(len(mats))]
    norms = [op_norm(M) for M in mats]
    rep = CheckReport("commutators", options_used={"tol": tol})
    for i, j in itertools.combinations(range(len(mats)), 2):
        res = op_norm(commutator(mats[i], mats[j]))
        bound = tol * max(1.0, norms[i] * norms[j])
        rep.upper(f"[{names[i]},{names[j]}]", res, bound, witness={"pair": [i, j]})
    return rep


def null_space(M, tol):
    """Orthonormal basis of the numerical null space of M (singular values <= tol)."""
    if M.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    if M.shape[0] == 0:
        return np.eye(M.shape[1], dtype=complex)
    _, s, vh = np.linalg.svd(M)
    s_full = np.zeros(M.shape[1])
    s_full[: len(s)] = s
    return adj(vh[s_full <= tol])


def principal_angles(A, B):
    """Principal angles between the column spans of two isometries (radians)."""
    if A.shape[1] == 0 and B.shape[1] == 0:
        return np.zeros(0)
    if A.shape[1] != B.shape[1]:
        return np.array([np.pi / 2])
    # cosines lose accuracy near zero; take small angles from the sines instead
    cos = np.sort(np.linalg.svd(adj(A) @ B, compute_uv=False))[::-1]
    sin = np.sort(np.linalg.svd(B - A @ (adj(A) @ B), compute_uv=False))
    ang = np.arccos(np.clip(cos, -1.0, 1.0))
    small = cos ** 2 > 0.5
    ang[small] = np.arcsin(np.clip(sin[small], 0.0, 1.0))
    return ang


def haar_unitary(n, rng):
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph
