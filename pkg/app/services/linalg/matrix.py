"""
Dense Matrix Primitives

Matrices are C-ordered float64 numpy arrays. `as_matrix` enforces the
type invariants (2-D, non-empty, finite) and hands back a read-only
array. The SVD wrapper canonicalizes singular-vector signs so results
are reproducible: the largest-magnitude entry of every U column is
positive, with the sign carried over to the matching V column.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.linalg import LinAlgError

from app.config import config
from app.errors import DecompositionError, ParameterError

logger = logging.getLogger(__name__)


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Validate and freeze a matrix argument."""
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ParameterError(f"{name} must be a non-empty 2-D array (got shape {arr.shape})")
    if arr.size > config["limits"]["max_tensor_entries"]:
        raise ParameterError(f"{name} has {arr.size} entries, above the 2^31 cap")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains NaN or Inf entries")
    if arr.flags.writeable or not arr.flags.c_contiguous:
        arr = np.array(arr, dtype=np.float64, order="C", copy=True)
        arr.setflags(write=False)
    return arr


def as_vector(v, length: int, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != length:
        raise ParameterError(f"{name} must have length {length} (got shape {arr.shape})")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains NaN or Inf entries")
    return arr


@dataclass(frozen=True)
class SVDFactors:
    """
    M = U diag(sigma) V^T with U (p x s), V (q x s) column-orthonormal and
    sigma nonincreasing. Zero singular values are kept, so s = min(p, q)
    for a full decomposition.
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        s = self.sigma.shape[0]
        if self.U.shape[1] != s or self.V.shape[1] != s:
            raise ParameterError(
                f"SVD factor shapes disagree: U {self.U.shape}, sigma ({s},), V {self.V.shape}"
            )
        if s and (np.any(self.sigma < 0) or np.any(np.diff(self.sigma) > 0)):
            raise ParameterError("singular values must be nonnegative and nonincreasing")

    @property
    def rank(self) -> int:
        return self.sigma.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.sigma) @ self.V.T

    def truncate(self, r: int) -> "SVDFactors":
        if not 1 <= r <= self.rank:
            raise ParameterError(f"truncation rank {r} outside [1, {self.rank}]")
        return SVDFactors(self.U[:, :r], self.sigma[:r], self.V[:, :r])


def _canonical_signs(U: np.ndarray, Vt: np.ndarray):
    pivots = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[pivots, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, Vt * signs[:, None]


def svd(M) -> SVDFactors:
    """Thin SVD of M with canonical signs; s = min(rows, cols)."""
    A = as_matrix(M)
    try:
        U, s, Vt = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesdd")
    except LinAlgError:
        logger.debug("[SVD] gesdd failed on %dx%d, retrying with gesvd", *A.shape)
        try:
            U, s, Vt = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd")
        except LinAlgError as exc:
            raise DecompositionError("SVD did not converge", A.shape) from exc
    U, Vt = _canonical_signs(U, Vt)
    return SVDFactors(U, s, Vt.T)


def truncated_svd(M, r: int) -> SVDFactors:
    """Leading r singular triplets; r may exceed rank(M), trailing sigmas are then 0."""
    A = as_matrix(M)
    limit = min(A.shape)
    if not isinstance(r, (int, np.integer)) or not 1 <= r <= limit:
        raise ParameterError(f"truncation rank r={r} outside [1, {limit}] for {A.shape[0]}x{A.shape[1]}")
    return svd(A).truncate(int(r))


def singular_values(M) -> np.ndarray:
    """All min(rows, cols) singular values, nonincreasing."""
    A = as_matrix(M)
    try:
        return scipy.linalg.svdvals(A)
    except LinAlgError as exc:
        raise DecompositionError("singular value computation did not converge", A.shape) from exc


def kronecker(A, B) -> np.ndarray:
    """A ⊗ B; entry ((i,a),(j,b)) sits at row i*p2 + a, column j*q2 + b."""
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    entries = A.size * B.size
    if entries > config["limits"]["max_tensor_entries"]:
        raise ParameterError(f"Kronecker product would hold {entries} entries, above the 2^31 cap")
    return np.kron(A, B)


def operator_norm(M) -> float:
    return float(singular_values(M)[0])


def frobenius_norm(M) -> float:
    A = as_matrix(M)
    return float(np.sqrt(np.sum(A * A)))


def tail_norm(sigma: Sequence[float], r: int) -> float:
    """sqrt(sum_{i>r} sigma_i^2), the rank-r Eckart-Young residual."""
    tail = np.asarray(sigma, dtype=np.float64)[r:]
    return float(np.sqrt(np.sum(tail * tail)))
