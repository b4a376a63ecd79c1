"""The mu_E function, the coordinate maps onto the Gamma sets, and certified sampling."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import InputError
from .linalg import DEFAULT_TOL, as_matrix, haar_unitary, op_norm, spectral_radius
from .report import CheckReport


@dataclass(frozen=True)
class MuSpace:
    """Block-diagonal structure diag(z_1 I_{r_1}, ..., z_s I_{r_s})."""

    r: tuple

    def __post_init__(self):
        r = tuple(int(k) for k in self.r)
        if not r or any(k < 1 for k in r):
            raise InputError(f"invalid block sizes {self.r}")
        object.__setattr__(self, "r", r)

    @property
    def n(self):
        return sum(self.r)

    @property
    def s(self):
        return len(self.r)

    def block_of(self):
        """Block index of every coordinate 0..n-1."""
        return [b for b, k in enumerate(self.r) for _ in range(k)]

    def expand(self, z):
        return np.diag(np.repeat(np.asarray(z, dtype=complex), self.r))

    @classmethod
    def parse(cls, text):
        """'3,1,1,1' -> n=3, r=(1,1,1); the leading n must match the sum."""
        parts = [int(p) for p in str(text).replace(";", ",").split(",") if p.strip()]
        if len(parts) < 2 or sum(parts[1:]) != parts[0]:
            raise InputError(f"space spec {text!r} must be 'n,r1,...,rs' with sum r = n")
        return cls(tuple(parts[1:]))

    def __str__(self):
        return f"E({self.n};{self.s};{','.join(map(str, self.r))})"


SPACE_333 = MuSpace((1, 1, 1))
SPACE_312 = MuSpace((1, 2))


@dataclass
class MuResult:
    value: float
    witness_z: np.ndarray
    grid_spec: dict
    diagnostics: dict = field(default_factory=dict)

    def singularity_residual(self, A, space):
        if self.value == 0.0:
            return 0.0
        n = space.n
        return float(abs(np.linalg.det(np.eye(n) - as_matrix(A) @ space.expand(self.witness_z))))


def _det_polynomial(A, space):
    """Coefficients of det(I - A X) as a polynomial in (z_1..z_s).

    Expansion over principal minors: det(I - A D) = sum_S (-1)^|S| det(A_SS) prod_{k in S} d_k.
    """
    n = space.n
    blocks = space.block_of()
    poly = {}
    for size in range(n + 1):
        for S in itertools.combinations(range(n), size):
            c = (-1) ** size * (np.linalg.det(A[np.ix_(S, S)]) if size else 1.0)
            e = [0] * space.s
            for k in S:
                e[blocks[k]] += 1
            key = tuple(e)
            poly[key] = poly.get(key, 0.0) + c
    return poly


def _inner_coefficients(poly, inner, outer_vals, space):
    """Coefficients (low -> high) of the polynomial in z_inner at given outer values.

    outer_vals has shape (m, s); column ``inner`` is ignored.
    """
    m = outer_vals.shape[0]
    deg = space.r[inner]
    coef = np.zeros((deg + 1, m), dtype=complex)
    for e, c in poly.items():
        if c == 0:
            continue
        term = np.full(m, c, dtype=complex)
        for j, p in enumerate(e):
            if j != inner and p:
                term = term * outer_vals[:, j] ** p
        coef[e[inner]] += term
    return coef


def _min_root_modulus(coef, rel=1e-12):
    """Smallest-modulus root per column; NaN where the polynomial is constant.

    Columns whose leading coefficient vanishes are solved at the lower degree.
    """
    deg, m = coef.shape[0] - 1, coef.shape[1]
    out = np.full(m, np.nan)
    roots = np.full(m, np.nan + 0j)
    if deg < 1:
        return out, roots
    scale = np.max(np.abs(coef), axis=0)
    lead = coef[-1]
    ok = np.abs(lead) > rel * np.maximum(scale, 1e-300)
    if not np.all(ok):
        out[~ok], roots[~ok] = _min_root_modulus(coef[:-1, ~ok], rel)
    if not np.any(ok):
        return out, roots
    if deg == 1:
        w = -coef[0, ok] / lead[ok]
        out[ok], roots[ok] = np.abs(w), w
        return out, roots
    # batch companion matrices for higher degree
    c = coef[:, ok] / lead[ok]
    k = c.shape[1]
    comp = np.zeros((k, deg, deg), dtype=complex)
    comp[:, 1:, :-1] = np.eye(deg - 1)
    comp[:, :, -1] = -c[:-1].T
    ev = np.linalg.eigvals(comp)
    idx = np.argmin(np.abs(ev), axis=1)
    w = ev[np.arange(k), idx]
    out[ok], roots[ok] = np.abs(w), w
    return out, roots


def _polar_grid(radius, n_radii, n_angles):
    rad = radius * np.arange(1, n_radii + 1) / n_radii
    ang = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    return np.concatenate([[0.0], np.outer(rad, ang).ravel()])


def _evaluate(poly, space, inner, outer_list):
    """Objective max(|outer|, |min inner root|) for an array of outer tuples (m, s-1)."""
    m = outer_list.shape[0]
    full = np.zeros((m, space.s), dtype=complex)
    others = [j for j in range(space.s) if j != inner]
    full[:, others] = outer_list
    # huge search radii can overflow to nan; those points are counted as skipped
    with np.errstate(over="ignore", invalid="ignore"):
        coef = _inner_coefficients(poly, inner, full, space)
        rmod, roots = _min_root_modulus(coef)
    outer_max = np.max(np.abs(outer_list), axis=1) if others else np.zeros(m)
    obj = np.maximum(outer_max, rmod)
    full[:, inner] = roots
    return obj, full


def _point_objective(terms, inner, deg, others, zo):
    """Scalar version of _evaluate for the refinement loop (no array overhead)."""
    coef = [0j] * (deg + 1)
    for e, c in terms:
        t = c
        for j, z in zip(others, zo):
            if e[j]:
                t *= z ** e[j]
        coef[e[inner]] += t
    scale = max(max(abs(c) for c in coef), 1e-300)
    while len(coef) > 1 and abs(coef[-1]) <= 1e-12 * scale:
        coef.pop()
    deg = len(coef) - 1
    if deg == 0:
        return np.inf, None
    if deg == 1:
        w = -coef[0] / coef[1]
    elif deg == 2:
        a, b, c = coef[2], coef[1], coef[0]
        disc = np.sqrt(complex(b * b - 4 * a * c))
        q = -0.5 * (b + disc if abs(b + disc) >= abs(b - disc) else b - disc)
        cand = [c / q if q != 0 else np.inf, q / a]
        w = min(cand, key=abs)
    else:
        r = np.roots(coef[::-1])
        w = r[np.argmin(np.abs(r))]
    om = max((abs(z) for z in zo), default=0.0)
    return max(om, abs(w)), w


def _phase_polish(A, space, n_angles=24):
    """max over block phases of the spectral radius of Q A, with its singular witness.

    For scalar complex blocks mu equals this maximum. If Q A v = lam v then
    det(I - A Q / lam) = 0, so z = q / lam is a singular point with max|z| = 1/|lam|.
    """
    s = space.s
    if s == 1:
        ev = np.linalg.eigvals(A)
        k = int(np.argmax(np.abs(ev)))
        return float(abs(ev[k])), np.array([1.0 / ev[k]]) if ev[k] != 0 else None
    g = 2 * np.pi * np.arange(n_angles) / n_angles
    mesh = np.meshgrid(*([g] * (s - 1)), indexing="ij")
    th = np.stack([m.ravel() for m in mesh], axis=1)
    blocks = np.asarray(space.block_of())

    def phases(t):
        t = np.atleast_2d(t)
        full = np.concatenate([np.zeros((t.shape[0], 1)), t], axis=1)
        return np.exp(1j * full)

    def radius(t):
        q = phases(t)[:, blocks]
        ev = np.linalg.eigvals(q[:, :, None] * A[None])
        return np.max(np.abs(ev), axis=1)

    vals = radius(th)
    k = int(np.argmax(vals))
    res = minimize(lambda t: -radius(t)[0], th[k], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
    t = res.x if -res.fun > vals[k] else th[k]
    q = phases(t)[0]
    ev = np.linalg.eigvals(q[blocks][:, None] * A)
    lam = ev[np.argmax(np.abs(ev))]
    if abs(lam) == 0:
        return 0.0, None
    return float(abs(lam)), q / lam


def _default_grid(n_outer):
    # one outer variable: 24 x 48; two or more: a coarse product grid plus multi-start refinement
    return (24, 48) if n_outer <= 1 else (8, 16)


def mu(A, space: MuSpace, n_radii=None, n_angles=None, refine=True, r_max=None,
       n_starts=2) -> MuResult:
    """Structured singular value over block-diagonal scalar perturbations.

    Returns 1 / inf{max_i |z_i| : det(I - A diag(z_i I_{r_i})) = 0}. The last
    s-1 variables are gridded on polar discs and the remaining one is solved
    exactly (its polynomial degree equals its block size). Every block takes a
    turn as the inner variable; the best few grid points are polished by
    Nelder-Mead over the real and imaginary parts of the outer variables.
    """
    A = as_matrix(A, "A", square=True)
    if A.shape[0] != space.n:
        raise InputError(f"A is {A.shape[0]}x{A.shape[0]} but space has n={space.n}")
    s = space.s
    dr, da = _default_grid(s - 1)
    n_radii = dr if n_radii is None else int(n_radii)
    n_angles = da if n_angles is None else int(n_angles)
    if n_radii < 1 or n_angles < 3:
        raise InputError("need n_radii >= 1 and n_angles >= 3")
    nrm = op_norm(A)
    # singular points satisfy max|z| >= 1/||A||, so small A needs a wide search
    R_max = 10.0 * max(1.0 + nrm, 1.0 / nrm if nrm else 1.0) if r_max is None else float(r_max)
    spec = {"n_radii": n_radii, "n_angles": n_angles, "refine": refine, "r_max": R_max,
            "n_starts": n_starts}
    if nrm == 0.0:
        return MuResult(0.0, np.zeros(s, dtype=complex), spec, {"reason": "A = 0"})
    poly = _det_polynomial(A, space)
    rA = spectral_radius(A)
    # optimum max|z| lies in [1/||A||, 1/r(A)] when r(A) > 0
    R1 = min(R_max, 1.05 / rA) if rA > 1e-12 else R_max
    skipped = 0
    cands = []  # (objective, inner, full z)
    for inner in range(s):
        best_here = np.inf
        for radius in (R1, None):
            if radius is None:
                if not np.isfinite(best_here):
                    break
                radius = min(R_max, 1.25 * best_here)
            if s == 1:
                outer = np.zeros((1, 0), dtype=complex)
            else:
                g = _polar_grid(radius, n_radii, n_angles)
                mesh = np.meshgrid(*([g] * (s - 1)), indexing="ij")
                outer = np.stack([m.ravel() for m in mesh], axis=1)
            obj, full = _evaluate(poly, space, inner, outer)
            nan = np.isnan(obj)
            skipped += int(nan.sum())
            if np.all(nan):
                continue
            obj = np.where(nan, np.inf, obj)
            top = np.argsort(obj, kind="stable")[:n_starts]
            for k in top:
                if np.isfinite(obj[k]):
                    cands.append((float(obj[k]), inner, full[k].copy()))
            best_here = min(best_here, float(obj[top[0]]))
    cands.sort(key=lambda c: c[0])
    # the phase polish below may still find a singular point when the grid found none
    best_obj, best_inner, best_z = cands[0] if cands else (np.inf, None, np.zeros(s, dtype=complex))
    if refine and s > 1:
        terms = [(e, complex(c)) for e, c in poly.items() if c != 0]
        for obj0, inner, z0 in cands[: n_starts]:
            others = [j for j in range(s) if j != inner]
            deg = space.r[inner]

            def f(x, inner=inner, others=others, deg=deg):
                zo = [complex(a, b) for a, b in zip(x[: s - 1], x[s - 1:])]
                return _point_objective(terms, inner, deg, others, zo)[0]

            x0 = np.concatenate([z0[others].real, z0[others].imag])
            res = minimize(f, x0, method="Nelder-Mead",
                           options={"xatol": 1e-7, "fatol": 1e-9, "maxiter": 120})
            if res.fun < best_obj:
                o = (res.x[: s - 1] + 1j * res.x[s - 1:])[None, :]
                val, full = _evaluate(poly, space, inner, o)
                if val[0] < best_obj:
                    best_obj, best_inner, best_z = float(val[0]), inner, full[0].copy()
    if refine:
        lam, zq = _phase_polish(A, space)
        if zq is not None and lam > 0 and 1.0 / lam < best_obj * (1 - 1e-14):
            best_obj, best_inner, best_z = 1.0 / lam, "phase", zq
    diag = {"skipped_points": skipped, "inner_block": best_inner}
    if best_obj > R_max:
        return MuResult(0.0, np.zeros(s, dtype=complex), spec,
                        dict(diag, reason="no singular X within search radius"))
    return MuResult(1.0 / best_obj, best_z, spec, diag)


def mu_lower_bound(A, space: MuSpace, n_angles=64):
    """max over block phases Q of r(QA); a lower bound on mu (equal for complex blocks)."""
    A = as_matrix(A, square=True)
    ph = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    best = 0.0
    for combo in itertools.product(ph, repeat=space.s - 1):
        Q = space.expand((1.0,) + combo)
        best = max(best, spectral_radius(Q @ A))
    return best


def coords333(A):
    """(x1..x7) = (a11, a22, M12, a33, M13, M23, det A) with M the principal 2x2 minors."""
    A = as_matrix(A, "A")
    if A.shape != (3, 3):
        raise InputError(f"coords333 needs a 3x3 matrix, got {A.shape}")
    a = A
    return np.array([
        a[0, 0],
        a[1, 1],
        a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0],
        a[2, 2],
        a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0],
        a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1],
        np.linalg.det(a),
    ], dtype=complex)


def coords312(A):
    """(x1, x2, x3, y1, y2) for the mu_{1,3}-quotient."""
    A = as_matrix(A, "A")
    if A.shape != (3, 3):
        raise InputError(f"coords312 needs a 3x3 matrix, got {A.shape}")
    a = A
    m12 = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    m13 = a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
    m23 = a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    return np.array([a[0, 0], m12 + m13, np.linalg.det(a), a[1, 1] + a[2, 2], m23], dtype=complex)


@dataclass
class GammaSample:
    """A coordinate point together with the matrix it came from and its mu."""

    point: np.ndarray
    A: np.ndarray
    mu: float
    family: str
    boundary: bool

    @property
    def certificate(self):
        return {"A": self.A, "mu": self.mu}


def _relation_report(title, rels, modulus, tol, certified):
    rep = CheckReport(title, options_used={"tol": tol})
    for name, lhs, rhs in rels:
        rep.upper(name, abs(lhs - rhs), tol * max(1.0, abs(lhs), abs(rhs)))
    rep.upper("|x|=1 (pivot unimodular)", abs(abs(modulus) - 1.0), tol)
    if certified is None:
        rep.notes.append("relations only: membership in Gamma not certified")
    else:
        rep.lower("certified mu <= 1", 1.0 - certified, -tol, note="mu of the generating matrix")
    return rep


def in_K(p, tol=DEFAULT_TOL, certified_mu=None) -> CheckReport:
    """Distinguished-boundary relations for a Gamma_{E(3;3;1,1,1)} point."""
    if isinstance(p, GammaSample):
        certified_mu, p = p.mu, p.point
    x = np.asarray(p, dtype=complex).ravel()
    if x.size != 7:
        raise InputError("in_K expects 7 coordinates")
    x1, x2, x3, x4, x5, x6, x7 = x
    rels = [
        ("x1 = conj(x6) x7", x1, np.conj(x6) * x7),
        ("x3 = conj(x4) x7", x3, np.conj(x4) * x7),
        ("x5 = conj(x2) x7", x5, np.conj(x2) * x7),
    ]
    return _relation_report("in_K", rels, x7, tol, certified_mu)


def in_K1(p, tol=DEFAULT_TOL, certified_mu=None) -> CheckReport:
    """Distinguished-boundary relations for a Gamma_{E(3;2;1,2)} point."""
    if isinstance(p, GammaSample):
        certified_mu, p = p.mu, p.point
    x = np.asarray(p, dtype=complex).ravel()
    if x.size != 5:
        raise InputError("in_K1 expects 5 coordinates")
    x1, x2, x3, y1, y2 = x
    rels = [
        ("x1 = conj(y2) x3", x1, np.conj(y2) * x3),
        ("x2 = conj(y1) x3", x2, np.conj(y1) * x3),
    ]
    return _relation_report("in_K1", rels, x3, tol, certified_mu)


FAMILY_SPACE = {"gamma333": SPACE_333, "gamma312": SPACE_312}
FAMILY_COORDS = {"gamma333": coords333, "gamma312": coords312}


def _family_of(space):
    for fam, sp in FAMILY_SPACE.items():
        if sp == space:
            return fam
    raise InputError(f"sampling supports E(3;3;1,1,1) and E(3;2;1,2), not {space}")


def sample_gamma(space: MuSpace, count, seed, boundary=False, eps=0.05, matrices=None,
                 max_retries=20, mu_options=None, recertify=False):
    """Random points of Gamma certified by the mu of the matrix that produced them.

    Each raw complex Gaussian 3x3 matrix is rescaled by its mu onto the
    boundary (mu = 1) or just inside it (mu = 1/(1+eps)). With ``matrices``
    the given matrices are rescaled instead of random ones. mu is positively
    homogeneous, so the scaled value is ``target`` unless ``recertify`` asks
    for a fresh evaluation on the scaled matrix.
    """
    fam = _family_of(space)
    if matrices is None and count < 1:
        raise InputError("count must be >= 1")
    rng = np.random.default_rng(seed)
    mu_options = mu_options or {}
    target = 1.0 if boundary else 1.0 / (1.0 + eps)
    raw = [as_matrix(M, square=True) for M in matrices] if matrices is not None else None
    n_out = len(raw) if raw is not None else count
    out = []
    for k in range(n_out):
        for _ in range(max_retries):
            A = raw[k] if raw is not None else (
                rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
            m = mu(A, space, **mu_options).value
            if m > 0:
                break
            if raw is not None:
                raise InputError(f"matrix {k} has mu = 0; cannot rescale onto Gamma")
        else:
            raise InputError("mu estimated 0 for every retry")
        As = A * (target / m)
        m_scaled = mu(As, space, **mu_options).value if recertify else target
        out.append(GammaSample(FAMILY_COORDS[fam](As), As, m_scaled, fam, boundary))
    return out


def sample_distinguished(space: MuSpace, count, seed):
    """Points of K (or K1): coordinate images of Haar-random unitary 3x3 matrices.

    A unitary A has r(A) = ||A|| = 1, so mu(A) = 1 for any structure that
    contains the scalars; its cofactor identities give the K relations.
    """
    fam = _family_of(space)
    if count < 1:
        raise InputError("count must be >= 1")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        U = haar_unitary(3, rng)
        out.append(GammaSample(FAMILY_COORDS[fam](U), U, 1.0, fam, True))
    return out
