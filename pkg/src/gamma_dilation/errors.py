"""Exception hierarchy shared by every module."""


class GammaDilationError(Exception):
    """Base class for errors raised by this package."""


class InputError(GammaDilationError, ValueError):
    """An argument has the wrong shape, is non-finite, or violates a precondition."""


class NotPSDError(InputError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue."""

    def __init__(self, msg, eigenvalue):
        super().__init__(msg)
        self.eigenvalue = eigenvalue


class NotContractionError(InputError):
    """An operator expected to be a contraction has norm above ``1 + tol``."""

    def __init__(self, msg, norm):
        super().__init__(msg)
        self.norm = norm


class NonCommutingError(InputError):
    """A tuple expected to commute does not; carries the worst pair."""

    def __init__(self, msg, pair, residual):
        super().__init__(msg)
        self.pair = pair
        self.residual = residual


class DiagonalizationError(GammaDilationError):
    """Joint diagonalization of a commuting normal family failed."""


class StructureError(GammaDilationError):
    """A model matrix does not have the banded/pencil structure it should."""


class DecompositionError(GammaDilationError):
    """A subspace that should reduce the tuple does not."""

    def __init__(self, msg, index, residual):
        super().__init__(msg)
        self.index = index
        self.residual = residual
