"""
Matrix Denoising

Truncated-SVD estimation of a matrix signal, its exact bias, and the
sample-covariance variant.
"""

import logging
from dataclasses import dataclass

import numpy as np

from app.config import config
from app.errors import ParameterError
from app.services.linalg import as_matrix, tail_norm, truncated_svd

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BiasBracket:
    """Certified interval [lower, upper] around the best rank-r approximation error."""

    lower: float
    upper: float

    def __post_init__(self):
        if self.lower < 0 or self.upper < 0:
            raise ParameterError(f"bias bounds must be >= 0 (got {self.lower}, {self.upper})")
        if self.lower > self.upper + config["tolerances"]["bracket_order"]:
            raise ParameterError(f"bias bracket inverted: lower {self.lower} > upper {self.upper}")

    @property
    def is_exact(self) -> bool:
        return self.lower == self.upper

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper}


def truncated_svd_estimate(Y, r: int) -> np.ndarray:
    """Y_(r) = Σ_{i<=r} σ_i u_i v_i^T."""
    return truncated_svd(Y, r).reconstruct()


def matrix_bias(sigma, r: int) -> BiasBracket:
    """Exact rank-r bias sqrt(Σ_{i>r} σ_i^2) (Eckart-Young-Mirsky)."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim != 1:
        raise ParameterError("sigma must be a 1-D sequence")
    if np.any(np.diff(sigma) > 0) or np.any(sigma < 0):
        raise ParameterError("sigma must be nonnegative and nonincreasing")
    if r < 0:
        raise ParameterError(f"r must be >= 0 (got {r})")
    xi = tail_norm(sigma, r)
    return BiasBracket(xi, xi)


def sample_covariance(samples) -> np.ndarray:
    Z = as_matrix(samples, "samples")
    cov = Z.T @ Z / Z.shape[0]
    return (cov + cov.T) / 2.0


def sample_cov_truncated(samples, r: int):
    """
    samples holds one draw per row (N x n). Returns the rank-r truncation
    of (1/N) Σ Z_k Z_k^T and the sample covariance itself.
    """
    cov = sample_covariance(samples)
    n = cov.shape[0]
    if not 1 <= r <= n:
        raise ParameterError(f"rank r={r} outside [1, {n}]")
    if r == n:
        return cov.copy(), cov
    estimate = truncated_svd_estimate(cov, r)
    return (estimate + estimate.T) / 2.0, cov
