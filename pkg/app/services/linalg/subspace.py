"""
Subspaces and sin-Θ Distances

A Subspace wraps a column-orthonormal basis. Distances between two
equal-rank subspaces are computed from the residual (I - UU^T)V, whose
singular values are the sines of the principal angles; this stays
accurate for nearly aligned subspaces where 1 - cos^2 cancels.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from app.config import config
from app.errors import ParameterError
from app.services.linalg.matrix import as_matrix, singular_values
from app.services.rng import SeedLike, generator, standard_normal

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Subspace:
    """Column space of an orthonormal (ambient_dim x rank) basis."""

    basis: np.ndarray

    def __post_init__(self):
        basis = as_matrix(self.basis, "subspace basis")
        p, r = basis.shape
        if r > p:
            raise ParameterError(f"subspace rank {r} exceeds ambient dimension {p}")
        gram_error = np.max(np.abs(basis.T @ basis - np.eye(r)))
        if gram_error > config["tolerances"]["orthonormality"]:
            raise ParameterError(f"basis columns are not orthonormal (max Gram error {gram_error:.2e})")
        object.__setattr__(self, "basis", basis)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def T(self) -> np.ndarray:
        return self.basis.T

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    @classmethod
    def span(cls, M) -> "Subspace":
        """Orthonormalize the columns of a full-column-rank matrix."""
        Q, R = np.linalg.qr(as_matrix(M))
        return cls(Q * _positive_diagonal(R))


class SinTheta(NamedTuple):
    spectral: float
    frobenius: float


def _positive_diagonal(R: np.ndarray) -> np.ndarray:
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return signs


def _check_pair(U: Subspace, V: Subspace):
    if U.ambient_dim != V.ambient_dim or U.rank != V.rank:
        raise ParameterError(
            f"subspaces must share ambient dim and rank (got {U.ambient_dim}x{U.rank} "
            f"and {V.ambient_dim}x{V.rank})"
        )


def sin_theta(U: Subspace, V: Subspace) -> SinTheta:
    """Spectral and Frobenius sin-Θ distance between equal-rank subspaces."""
    _check_pair(U, V)
    residual = V.basis - U.basis @ (U.basis.T @ V.basis)
    sines = singular_values(residual)
    spectral = min(float(sines[0]), 1.0)
    frobenius = min(float(np.sqrt(np.sum(sines * sines))), float(np.sqrt(U.rank)))
    return SinTheta(spectral, frobenius)


def complement(U: Subspace) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement (ambient_dim x (ambient_dim - rank))."""
    return scipy.linalg.null_space(U.basis.T)


def projection_distance(U: Subspace, V: Subspace) -> SinTheta:
    """Spectral and Frobenius norms of UU^T - VV^T."""
    _check_pair(U, V)
    diff = U.projector() - V.projector()
    return SinTheta(float(singular_values(diff)[0]), float(np.linalg.norm(diff)))


def random_orthonormal(p: int, r: int, seed: SeedLike) -> Subspace:
    """
    Haar-distributed r-frame in R^p: QR of an i.i.d. standard Gaussian
    p x r matrix with the diagonal of R made positive.
    """
    if p < 1 or r < 1:
        raise ParameterError(f"p and r must be positive (got p={p}, r={r})")
    if r > p:
        raise ParameterError(f"cannot draw {r} orthonormal columns in dimension {p}")
    G = standard_normal(generator(seed, "orthonormal"), (p, r))
    Q, R = np.linalg.qr(G)
    return Subspace(Q * _positive_diagonal(R))
