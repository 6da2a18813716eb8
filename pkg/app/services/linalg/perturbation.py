"""
Matrix Perturbation Oracles

Slack evaluators for the classical singular-value inequalities the
denoising guarantees are built on. Each function returns right-hand
side minus left-hand side, so a slack below -tolerances.inequality_slack
marks a violation. They are used as property-test oracles and by the
`check-bounds` command.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from app.config import config
from app.errors import ParameterError
from app.services.linalg.matrix import (
    as_matrix,
    frobenius_norm,
    operator_norm,
    singular_values,
    tail_norm,
    truncated_svd,
)
from app.services.linalg.subspace import Subspace, sin_theta

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PerturbationReport:
    """Slacks for Mirsky, Weyl and Ky Fan on one (A, B) pair."""

    mirsky_frobenius: float
    mirsky_spectral: float
    weyl: Dict[Tuple[int, int], float] = field(default_factory=dict)
    ky_fan: float = 0.0
    k: int = 1

    def slacks(self) -> List[float]:
        return [self.mirsky_frobenius, self.mirsky_spectral, self.ky_fan, *self.weyl.values()]

    def min_slack(self) -> float:
        return min(self.slacks())

    def violations(self, tol: float = None) -> List[str]:
        tol = config["tolerances"]["inequality_slack"] if tol is None else tol
        found = []
        if self.mirsky_frobenius < -tol:
            found.append("mirsky_frobenius")
        if self.mirsky_spectral < -tol:
            found.append("mirsky_spectral")
        if self.ky_fan < -tol:
            found.append(f"ky_fan(k={self.k})")
        found.extend(f"weyl(i={i},j={j})" for (i, j), s in self.weyl.items() if s < -tol)
        return found


def perturbation_inequalities_report(A, B, k: int) -> PerturbationReport:
    """
    Mirsky: ||Σ(A) - Σ(B)|| <= ||A - B|| (Frobenius and spectral).
    Weyl:   σ_{i+j-1}(A + B) <= σ_i(A) + σ_j(B) for every i + j - 1 <= min(m, n).
    Ky Fan: top-k root-sum-of-squares is subadditive over A + B.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape != B.shape:
        raise ParameterError(f"A and B must share a shape (got {A.shape} and {B.shape})")
    limit = min(A.shape)
    if not 1 <= k <= limit:
        raise ParameterError(f"k={k} outside [1, {limit}]")

    sa = singular_values(A)
    sb = singular_values(B)
    ssum = singular_values(A + B)
    diff = A - B

    mirsky_f = frobenius_norm(diff) - float(np.linalg.norm(sa - sb))
    mirsky_2 = operator_norm(diff) - float(np.max(np.abs(sa - sb)))

    weyl = {
        (i, j): float(sa[i - 1] + sb[j - 1] - ssum[i + j - 2])
        for i, j in itertools.product(range(1, limit + 1), repeat=2)
        if i + j - 1 <= limit
    }

    def top(s):
        return float(np.sqrt(np.sum(s[:k] ** 2)))

    ky_fan = top(sa) + top(sb) - top(ssum)
    return PerturbationReport(mirsky_f, mirsky_2, weyl, ky_fan, k)


def perturbation_approx_slack(B, Z, R: int) -> float:
    """
    With Û_⊥ the complement of the top-R left singular space of A = B + Z:
    3||B_(R) - B||_F + 2 min{√R ||Z||, ||Z||_F} - ||P_{Û⊥} B||_F.
    """
    B = as_matrix(B, "B")
    Z = as_matrix(Z, "Z")
    if B.shape != Z.shape:
        raise ParameterError(f"B and Z must share a shape (got {B.shape} and {Z.shape})")
    U_hat = truncated_svd(B + Z, R).U
    leftover = B - U_hat @ (U_hat.T @ B)
    bound = 3.0 * tail_norm(singular_values(B), R) + 2.0 * min(
        np.sqrt(R) * operator_norm(Z), frobenius_norm(Z)
    )
    return float(bound - np.linalg.norm(leftover))


def frobenius_lower_bound_slack(A, B) -> float:
    """||AB||_F - σ_min(B)||A||_F for square B."""
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if B.shape[0] != B.shape[1] or A.shape[1] != B.shape[0]:
        raise ParameterError(f"need A (n x m) and square B (m x m), got {A.shape} and {B.shape}")
    return float(np.linalg.norm(A @ B) - singular_values(B)[-1] * np.linalg.norm(A))


def product_singular_value_slacks(A, B) -> Dict[str, float]:
    """
    Worst slacks of σ_j(AB) <= σ_j(A) σ_max(B) and, for square B,
    σ_j(AB) >= σ_j(A) σ_min(B).
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape[1] != B.shape[0]:
        raise ParameterError(f"inner dimensions differ: {A.shape} x {B.shape}")
    sab = singular_values(A @ B)
    sa = singular_values(A)
    sb = singular_values(B)
    count = min(len(sab), len(sa))
    slacks = {"upper": float(np.min(sa[:count] * sb[0] - sab[:count]))}
    if B.shape[0] == B.shape[1]:
        slacks["lower"] = float(np.min(sab[:count] - sa[:count] * sb[-1]))
    return slacks


def projection_norm_gap(A, U: Subspace) -> float:
    """| ||A U U^T||_F - ||A U||_F |, zero up to rounding."""
    A = as_matrix(A, "A")
    return abs(float(np.linalg.norm(A @ U.projector()) - np.linalg.norm(A @ U.basis)))


def sin_theta_triangle_slack(V1: Subspace, V2: Subspace, V3: Subspace) -> Tuple[float, float]:
    """d(V1,V2) + d(V1,V3) - d(V2,V3) for both sin-Θ norms."""
    d12 = sin_theta(V1, V2)
    d13 = sin_theta(V1, V3)
    d23 = sin_theta(V2, V3)
    return (
        d12.spectral + d13.spectral - d23.spectral,
        d12.frobenius + d13.frobenius - d23.frobenius,
    )
