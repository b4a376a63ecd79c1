"""Numerical toolkit for Gamma_{E(3;3;1,1,1)} and Gamma_{E(3;2;1,2)} contractions.

Necessary-condition checks, fundamental operators, truncated dilations,
block-Toeplitz models and the canonical decomposition.
"""

from .checks import (check_gamma312, check_gamma333, check_isometry312, check_isometry333,
                     check_unitary312, check_unitary333, joint_diagonalize, rho_sym_bidisc,
                     rho_tetra)
from .decomposition import (DecompResult, canonical_decompose_312, canonical_decompose_333,
                            unitary_part, verify_block_identities)
from .dilation import (DilationTruncation, build_coisometric_312, build_coisometric_333,
                       build_schaffer_312, build_schaffer_333, verify_dilation)
from .errors import (DecompositionError, DiagonalizationError, GammaDilationError, InputError,
                     NonCommutingError, NotContractionError, NotPSDError, StructureError)
from .fundamental import (FundamentalSet312, FundamentalSet333, check_dilation_hypotheses_312,
                          check_dilation_hypotheses_333, solve_fundamental_312,
                          solve_fundamental_333, verify_lemma_identities_312,
                          verify_lemma_identities_333)
from .geometry import (SPACE_312, SPACE_333, MuResult, MuSpace, coords312, coords333, in_K,
                       in_K1, mu, sample_distinguished, sample_gamma)
from .linalg import defect, numerical_radius, op_norm, spectral_radius
from .models import (ToeplitzModel, blh_intertwine_check, build_pure_isometry_model_312,
                     build_pure_isometry_model_333, compress_model, recover_coefficients)
from .report import CheckItem, CheckReport
from .tuples import OperatorPencil, OperatorTuple

__version__ = "0.1.0"
