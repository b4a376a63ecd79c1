"""Seeded test instances: diagonal models, unitary tuples, mixtures, F-families."""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .geometry import FAMILY_SPACE, sample_distinguished, sample_gamma
from .linalg import adj, haar_unitary
from .tuples import OperatorTuple

FAMILIES = ("gamma333", "gamma312")


def _space(family):
    if family not in FAMILY_SPACE:
        raise InputError(f"family must be one of {FAMILIES}, got {family!r}")
    return FAMILY_SPACE[family]


def _check_dim(dim):
    if int(dim) < 1:
        raise InputError(f"dimension must be >= 1, got {dim}")
    return int(dim)


def _diag_tuple(family, points):
    P = np.array(points)
    return OperatorTuple(family, [np.diag(P[:, k]) for k in range(P.shape[1])])


def _maybe_rotate(tup, rotate, rng):
    if not rotate:
        return tup, np.eye(tup.dim, dtype=complex)
    U = haar_unitary(tup.dim, rng)
    return OperatorTuple(tup.family, [U @ M @ adj(U) for M in tup.operators], tup.tag), U


def diagonal_model(family, dim, seed, boundary=False, eps=0.05, rotate=False) -> OperatorTuple:
    """T_k = diag of coordinate k over ``dim`` certified sample points.

    With ``rotate`` the tuple is conjugated by a Haar unitary, which keeps it
    normal and commuting but makes it dense.
    """
    dim = _check_dim(dim)
    pts = sample_gamma(_space(family), dim, seed, boundary=boundary, eps=eps)
    tup = _diag_tuple(family, [p.point for p in pts])
    tup.tag = "diagonal"
    tup.meta = {"construction": "diagonal", "seed": seed, "boundary": boundary, "eps": eps,
                "certificates": [{"mu": p.mu} for p in pts]}
    rng = np.random.default_rng([seed, 1])
    tup, _ = _maybe_rotate(tup, rotate, rng)
    tup.meta = {"construction": "diagonal", "seed": seed, "boundary": boundary, "eps": eps,
                "rotated": rotate, "certificates": [{"mu": p.mu} for p in pts]}
    return tup


def unitary_model(family, dim, seed, rotate=True) -> OperatorTuple:
    """Gamma-unitary: images of Haar unitaries (points of K or K1), optionally rotated."""
    dim = _check_dim(dim)
    pts = sample_distinguished(_space(family), dim, seed)
    tup = _diag_tuple(family, [p.point for p in pts])
    rng = np.random.default_rng([seed, 2])
    tup, _ = _maybe_rotate(tup, rotate, rng)
    tup.tag = "unitary"
    tup.meta = {"construction": "unitary", "seed": seed, "rotated": rotate}
    return tup


def mixture(family, dim_unitary, dim_cnu, seed, eps=0.05):
    """Unitary part (distinguished-boundary points) plus an interior diagonal part, rotated.

    Returns (tuple, h1) where h1 spans the unitary summand in the rotated frame.
    """
    if dim_unitary < 0 or dim_cnu < 0 or dim_unitary + dim_cnu < 1:
        raise InputError("need nonnegative part dimensions with a positive total")
    space = _space(family)
    pts = []
    if dim_unitary:
        pts += [p.point for p in sample_distinguished(space, dim_unitary, [seed, 3])]
    if dim_cnu:
        pts += [p.point for p in sample_gamma(space, dim_cnu, [seed, 4], eps=eps)]
    tup = _diag_tuple(family, pts)
    rng = np.random.default_rng([seed, 5])
    tup, U = _maybe_rotate(tup, True, rng)
    tup.tag = "mixture"
    tup.meta = {"construction": "mixture", "seed": seed, "dim_unitary": dim_unitary,
                "dim_cnu": dim_cnu}
    return tup, U[:, :dim_unitary]


def f_family_333(e, seed, eps=0.05, rotate=True):
    """Six e x e matrices satisfying the pure-isometry model hypotheses.

    Scalar fundamental operators of interior points are commuting and
    satisfy |F_i| + |F_{7-i}| <= 1; conjugating the diagonal family by one
    unitary preserves every hypothesis.
    """
    from .fundamental import scalar_fundamental_333

    e = _check_dim(e)
    pts = sample_gamma(FAMILY_SPACE["gamma333"], e, seed, eps=eps)
    vals = np.array([scalar_fundamental_333(p.point) for p in pts])  # e x 6
    U = haar_unitary(e, np.random.default_rng([seed, 6])) if rotate else np.eye(e)
    return [U @ np.diag(vals[:, i]) @ adj(U) for i in range(6)]


def g_family_312(e, seed, eps=0.05, rotate=True):
    """(G1, G2, Gt1, Gt2) built the same way from Gamma_{E(3;2;1,2)} points."""
    from .fundamental import scalar_fundamental_312

    e = _check_dim(e)
    pts = sample_gamma(FAMILY_SPACE["gamma312"], e, seed, eps=eps)
    vals = np.array([scalar_fundamental_312(p.point) for p in pts])  # e x 4
    U = haar_unitary(e, np.random.default_rng([seed, 7])) if rotate else np.eye(e)
    return [U @ np.diag(vals[:, i]) @ adj(U) for i in range(4)]


def compressed_model(family, e, depth, keep_blocks, seed):
    """Compression of a pure-isometry Toeplitz model to its first ``keep_blocks`` blocks."""
    from .models import build_pure_isometry_model_312, build_pure_isometry_model_333, compress_model

    if family == "gamma333":
        model = build_pure_isometry_model_333(f_family_333(e, seed), depth)
    elif family == "gamma312":
        model = build_pure_isometry_model_312(*g_family_312(e, seed), depth)
    else:
        raise InputError(f"family must be one of {FAMILIES}")
    tup = compress_model(model, keep_blocks)
    tup.meta = {"construction": "compressed", "seed": seed, "coeff_dim": e, "depth": depth,
                "keep_blocks": keep_blocks}
    return tup
