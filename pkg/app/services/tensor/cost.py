"""
Flop-Counted Contractions

Cost model for multiplying by dense versus factored operators. One
multiply-add pair counts 2 flops; memory traffic is not modelled.

  dense tensor  Y ×1 v1 ×2 v2 ×3 v3          2 p1 p2 p3
  Tucker        t_k = U_k^T v_k              2 Σ p_k r_k
                S' = S ×1 t1                 2 r1 r2 r3
                s  = t2^T S'                 2 r2 r3
                w  = s^T t3                  r3
  dense matrix  Y v                          2 m n
  factored      V^T v, Σ·, U·                2 n r + r + 2 m r
"""

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from app.errors import ParameterError
from app.services.linalg import SVDFactors, as_matrix, as_vector
from app.services.tensor.tensor3 import as_tensor3
from app.services.tensor.tucker import TuckerDecomposition


@dataclass(frozen=True)
class FlopCount:
    multiplies_adds: int = 0

    def __post_init__(self):
        if self.multiplies_adds < 0:
            raise ParameterError(f"flop count must be >= 0 (got {self.multiplies_adds})")

    def __add__(self, other: "FlopCount") -> "FlopCount":
        return FlopCount(self.multiplies_adds + other.multiplies_adds)

    def __int__(self) -> int:
        return self.multiplies_adds


class Contraction(NamedTuple):
    value: float
    flops: FlopCount


class MatVec(NamedTuple):
    value: np.ndarray
    flops: FlopCount


def contract_vectors_dense(X, v1, v2, v3) -> Contraction:
    X = as_tensor3(X)
    p1, p2, p3 = X.shape
    v1 = as_vector(v1, p1, "v1")
    v2 = as_vector(v2, p2, "v2")
    v3 = as_vector(v3, p3, "v3")
    value = float(v3 @ (v2 @ np.tensordot(v1, X, axes=1)))
    return Contraction(value, FlopCount(2 * p1 * p2 * p3))


def contract_vectors_tucker(T: TuckerDecomposition, v1, v2, v3) -> Contraction:
    p = T.dims
    r1, r2, r3 = T.ranks
    vs = [as_vector(v, n, f"v{k}") for k, (v, n) in enumerate(zip((v1, v2, v3), p), start=1)]
    t1, t2, t3 = (U.T @ v for U, v in zip(T.factors, vs))
    s_prime = np.tensordot(t1, T.core, axes=1)
    s = t2 @ s_prime
    w = float(s @ t3)
    flops = FlopCount(2 * sum(pk * rk for pk, rk in zip(p, T.ranks)))
    flops += FlopCount(2 * r1 * r2 * r3) + FlopCount(2 * r2 * r3) + FlopCount(r3)
    return Contraction(w, flops)


def matvec_dense(Y, v) -> MatVec:
    Y = as_matrix(Y)
    m, n = Y.shape
    return MatVec(Y @ as_vector(v, n), FlopCount(2 * m * n))


def matvec_factored(factors: SVDFactors, v) -> MatVec:
    m, r = factors.U.shape
    n = factors.V.shape[0]
    t = factors.V.T @ as_vector(v, n)
    s = factors.sigma * t
    w = factors.U @ s
    return MatVec(w, FlopCount(2 * n * r + r + 2 * m * r))


def tucker_storage(dims: Sequence[int], ranks: Sequence[int]) -> int:
    """Scalars stored by a Tucker representation: Σ p_k r_k + r1 r2 r3."""
    if len(dims) != 3 or len(ranks) != 3:
        raise ParameterError("dims and ranks must both have three entries")
    return sum(p * r for p, r in zip(dims, ranks)) + int(np.prod(ranks))


def svd_storage(m: int, n: int, r: int) -> int:
    """Scalars stored by a rank-r SVD: m r + r + n r."""
    return m * r + r + n * r
