"""Hafnians and loop hafnians by enumeration, by series coefficients and by generating function."""

from .combinatorial import (
    enumerate_pmp,
    enumerate_spm,
    haf_bruteforce,
    lhaf_bruteforce,
    lhaf_diagonal,
)
from .errors import LoopHafError
from .genfun import (
    LhafBatch,
    VerificationReport,
    eq13_identity_check,
    lemma_lhaf,
    lhaf_batch,
    master_lhs_series,
    verify_master_theorem,
)
from .matrix import embed_odd, extend_matrix, extend_vector, paired_extension, validate_symmetric
from .moments import GaussianSpec, central_moment, gaussian_moment, mc_moment_estimate
from .series import SeriesMatrix, TruncatedSeries

__version__ = "0.1.0"
