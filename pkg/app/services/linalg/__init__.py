from .matrix import (
    SVDFactors,
    as_matrix,
    as_vector,
    frobenius_norm,
    kronecker,
    operator_norm,
    singular_values,
    svd,
    tail_norm,
    truncated_svd,
)
from .subspace import (
    SinTheta,
    Subspace,
    complement,
    projection_distance,
    random_orthonormal,
    sin_theta,
)
from .perturbation import (
    PerturbationReport,
    frobenius_lower_bound_slack,
    perturbation_approx_slack,
    perturbation_inequalities_report,
    product_singular_value_slacks,
    projection_norm_gap,
    sin_theta_triangle_slack,
)
