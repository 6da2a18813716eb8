from .matrix_denoise import (
    BiasBracket,
    matrix_bias,
    sample_cov_truncated,
    sample_covariance,
    truncated_svd_estimate,
)
from .hosvd import (
    HOOIResult,
    HOSVDResult,
    TargetRanks,
    hooi_refine,
    hosvd_factors,
    hosvd_truncate,
    one_step_hosvd,
    one_step_hosvd_batch,
    tucker_bias_bracket,
)
