from linalg.errors import (
    ConfigError,
    DimensionError,
    InvalidMatrix,
    InvalidParameter,
    InvalidRegime,
    NotSpd,
    NotSymmetric,
    RankDeficient,
    RiskLabError,
    TooManyResamples,
)
from linalg.dense import (
    DEFAULT_RANK_TOL,
    SpectralDistribution,
    SvdFactors,
    esd,
    min_norm_solve,
    numerical_rank,
    pseudo_inverse,
    spd_inv_sqrt,
    spd_sqrt,
    svd_thin,
    trace_weighted_pinv,
)
