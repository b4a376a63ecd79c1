"""Commuting operator tuples tagged with their family, and linear operator pencils."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NonCommutingError
from .linalg import DEFAULT_TOL, adj, as_matrix, commutator, commutator_report, op_norm

FAMILY_NAMES = {
    "gamma333": ("T1", "T2", "T3", "T4", "T5", "T6", "T7"),
    "gamma312": ("S1", "S2", "S3", "St1", "St2"),
    "tetrablock": ("T1", "T2", "T3"),
    "bidisc_pair": ("S", "P"),
}

# index of the pivot contraction (T7, S3, ...) per family
PIVOT = {"gamma333": 6, "gamma312": 2, "tetrablock": 2, "bidisc_pair": 1}


@dataclass
class OperatorTuple:
    """A family-tagged list of square matrices of a common dimension."""

    family: str
    operators: list
    tag: str | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILY_NAMES:
            raise InputError(f"unknown family {self.family!r}; expected one of {sorted(FAMILY_NAMES)}")
        names = FAMILY_NAMES[self.family]
        if len(self.operators) != len(names):
            raise InputError(f"{self.family} needs {len(names)} operators, got {len(self.operators)}")
        ops = [as_matrix(M, names[k], square=True) for k, M in enumerate(self.operators)]
        dims = {M.shape[0] for M in ops}
        if len(dims) != 1:
            raise InputError(f"operators of unequal dimension: {sorted(dims)}")
        self.operators = ops

    @classmethod
    def from_dict(cls, family, mats, tag=None):
        names = FAMILY_NAMES.get(family)
        if names is None:
            raise InputError(f"unknown family {family!r}")
        missing = [n for n in names if n not in mats]
        if missing:
            raise InputError(f"missing operators for {family}: {missing}")
        return cls(family, [mats[n] for n in names], tag)

    @property
    def names(self):
        return FAMILY_NAMES[self.family]

    @property
    def dim(self):
        return self.operators[0].shape[0]

    @property
    def pivot(self):
        return self.operators[PIVOT[self.family]]

    def __getitem__(self, key):
        if isinstance(key, str):
            return self.operators[self.names.index(key)]
        return self.operators[key]

    def __len__(self):
        return len(self.operators)

    def as_dict(self):
        return dict(zip(self.names, self.operators))

    def adjoint(self):
        return OperatorTuple(self.family, [adj(M) for M in self.operators], self.tag, dict(self.meta))

    def conjugate(self, U):
        """U^H M U for every operator (U unitary, or an isometry for restriction)."""
        U = as_matrix(U, "U")
        return OperatorTuple(self.family, [adj(U) @ M @ U for M in self.operators], self.tag,
                             dict(self.meta))

    restrict = conjugate

    def commutator_report(self, tol=DEFAULT_TOL):
        return commutator_report(self.operators, tol, list(self.names))

    def require_commuting(self, tol=DEFAULT_TOL):
        """Raise NonCommutingError naming the worst pair when any commutator exceeds tol."""
        worst, pair = 0.0, None
        for i in range(len(self.operators)):
            for j in range(i + 1, len(self.operators)):
                A, B = self.operators[i], self.operators[j]
                res = op_norm(commutator(A, B))
                rel = res / max(1.0, op_norm(A) * op_norm(B))
                if rel > worst:
                    worst, pair = rel, (self.names[i], self.names[j])
        if worst > tol:
            raise NonCommutingError(f"tuple does not commute: [{pair[0]},{pair[1]}] = {worst:.3e}",
                                    pair, worst)
        return worst


@dataclass
class OperatorPencil:
    """z -> constant + z * linear."""

    constant: np.ndarray
    linear: np.ndarray

    def __post_init__(self):
        self.constant = as_matrix(self.constant, "constant", square=True)
        self.linear = as_matrix(self.linear, "linear", square=True)
        if self.constant.shape != self.linear.shape:
            raise InputError("pencil coefficients have different shapes")

    def __call__(self, z):
        return self.constant + z * self.linear

    def at(self, zs):
        zs = np.asarray(zs, dtype=complex)
        return self.constant[None] + zs[:, None, None] * self.linear[None]

    @property
    def dim(self):
        return self.constant.shape[0]
