from .theory import (
    THM2_CONSTANT,
    BoundReport,
    SNRMargins,
    bound_report,
    corollary_rates,
    empirical_constant,
    matrix_bound_report,
    sin_theta_bound_unbalanced,
    snr_condition,
    thm1_variance_term,
    thm2_bound,
)
from .concentration import OpnormSummary, monte_carlo_opnorm
