"""
Tucker Decompositions

X ≈ S ×1 U1 ×2 U2 ×3 U3 with an (r1, r2, r3) core S and column-orthonormal
factors U_k (p_k x r_k).
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from tensorly.tucker_tensor import tucker_to_tensor

from app.errors import ParameterError
from app.services.linalg import Subspace
from app.services.tensor.tensor3 import Dims, as_tensor3, mode_products

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TuckerDecomposition:
    core: np.ndarray
    factors: Tuple[Subspace, Subspace, Subspace]

    def __post_init__(self):
        core = as_tensor3(self.core, "Tucker core")
        factors = tuple(self.factors)
        if len(factors) != 3 or not all(isinstance(U, Subspace) for U in factors):
            raise ParameterError("a Tucker decomposition needs exactly three Subspace factors")
        ranks = tuple(U.rank for U in factors)
        if ranks != core.shape:
            raise ParameterError(f"core dims {core.shape} do not match factor ranks {ranks}")
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "factors", factors)

    @property
    def dims(self) -> Dims:
        return tuple(U.ambient_dim for U in self.factors)

    @property
    def ranks(self) -> Dims:
        return self.core.shape

    def reconstruct(self) -> np.ndarray:
        return tucker_reconstruct(self)


def tucker_reconstruct(T: TuckerDecomposition) -> np.ndarray:
    """Dense S ×1 U1 ×2 U2 ×3 U3 of dims (p1, p2, p3)."""
    return as_tensor3(tucker_to_tensor((T.core, [U.basis for U in T.factors])))


def project_onto(X, factors: Tuple[Subspace, Subspace, Subspace]) -> TuckerDecomposition:
    """Core X ×1 U1^T ×2 U2^T ×3 U3^T; its reconstruction is X ×k P_{U_k}."""
    core = mode_products(X, [U.T for U in factors])
    return TuckerDecomposition(core, tuple(factors))
