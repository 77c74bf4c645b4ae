"""Randomized low-rank matrix decompositions with sparse sub-Gaussian sketches."""

from .errors import DimensionError, RankDeficiencyError, SvdConvergenceError
from .linalg import LinearOperator, aslinearoperator
from .rlu import LuFactors, RluParams, randomized_lu
from .rsvd import RsvdParams, SvdFactors, randomized_svd, truncate_rank, weyl_check
from .sketch import SketchSpec, SubGaussianLaw

__version__ = "0.1.0"

__all__ = [
    "DimensionError",
    "LinearOperator",
    "LuFactors",
    "RankDeficiencyError",
    "RluParams",
    "RsvdParams",
    "SketchSpec",
    "SubGaussianLaw",
    "SvdConvergenceError",
    "SvdFactors",
    "aslinearoperator",
    "randomized_lu",
    "randomized_svd",
    "truncate_rank",
    "weyl_check",
]
