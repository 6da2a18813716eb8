"""
One-Step HOSVD

Tucker-rank (r1, r2, r3) denoising of a third-order tensor:

  Stage 0   U_k^(0) = top-r_k left singular vectors of M_k(Y)
  Stage 1   U_1^(1) from M_1(Y)(U_2^(0) ⊗ U_3^(0)), and cyclically
  Output    Y ×1 P_{U_1^(1)} ×2 P_{U_2^(1)} ×3 P_{U_3^(1)}

The Stage-1 products are formed as M_1(Y ×2 U_2^T ×3 U_3^T), which
equals M_1(Y)(U_2 ⊗ U_3) under the unfolding convention of the tensor
service without materializing the Kronecker factor.

Also here: the certified bracket around the best Tucker approximation
error, and HOOI refinement to tighten its upper end.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from tensorly import tenalg

from app.config import config
from app.errors import ParameterError
from app.services.estimators.matrix_denoise import BiasBracket
from app.services.linalg import Subspace, complement, tail_norm, truncated_svd
from app.services.tensor import (
    TuckerDecomposition,
    as_tensor3,
    matricize,
    project_onto,
    unfolding_singular_values,
)

logger = logging.getLogger(__name__)

Factors = Tuple[Subspace, Subspace, Subspace]


@dataclass(frozen=True)
class TargetRanks:
    r1: int
    r2: int
    r3: int

    def __post_init__(self):
        for r in self.as_tuple():
            if not isinstance(r, (int, np.integer)) or r < 1:
                raise ParameterError(f"target ranks must be positive integers (got {self.as_tuple()})")

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.r1, self.r2, self.r3)

    @classmethod
    def uniform(cls, r: int) -> "TargetRanks":
        return cls(r, r, r)

    @classmethod
    def parse(cls, text: str) -> "TargetRanks":
        """'r1,r2,r3' or a single 'r' for (r, r, r)."""
        try:
            values = [int(part) for part in text.split(",")]
        except ValueError as exc:
            raise ParameterError(f"cannot parse ranks {text!r}") from exc
        if len(values) == 1:
            values *= 3
        if len(values) != 3:
            raise ParameterError(f"expected one or three ranks, got {text!r}")
        return cls(*values)

    def validate(self, dims: Sequence[int]) -> None:
        """r_k <= p_k; r_k = p_k leaves that mode untouched."""
        for k, (r, p) in enumerate(zip(self.as_tuple(), dims), start=1):
            if r > p:
                raise ParameterError(f"rank r{k}={r} exceeds dimension p{k}={p}")


@dataclass(frozen=True)
class HOSVDResult:
    estimate: np.ndarray
    decomposition: TuckerDecomposition
    initial_factors: Factors
    refined_factors: Factors


@dataclass(frozen=True)
class HOOIResult:
    decomposition: TuckerDecomposition
    achieved_error: float
    history: List[float] = field(default_factory=list)


def _coerce_ranks(ranks) -> TargetRanks:
    if isinstance(ranks, TargetRanks):
        return ranks
    return TargetRanks(*ranks)


def _leading_subspace(M, r: int) -> Subspace:
    """Top-r left singular subspace; identity at r = rows, completed from the complement past the column count."""
    rows, cols = M.shape
    if r == rows:
        return Subspace(np.eye(rows))
    if r <= cols:
        return Subspace(truncated_svd(M, r).U)
    left = Subspace(truncated_svd(M, cols).U)
    return Subspace(np.hstack([left.basis, complement(left)[:, : r - cols]]))


def hosvd_factors(Y, ranks) -> Factors:
    """Stage 0: top-r_k left singular subspace of each unfolding."""
    Y = as_tensor3(Y)
    ranks = _coerce_ranks(ranks)
    ranks.validate(Y.shape)
    return tuple(_leading_subspace(matricize(Y, k), r) for k, r in enumerate(ranks.as_tuple(), start=1))


def _update_factor(Y: np.ndarray, factors: Factors, mode: int, r: int) -> Subspace:
    """
    Top-r left singular subspace of M_mode(Y) times the Kronecker product of the other factors.

    r = p_mode gives the identity basis. When r exceeds the r_a r_b columns
    of the compressed unfolding, the current factor for that mode is kept.
    """
    p = Y.shape[mode - 1]
    if r == p:
        return Subspace(np.eye(p))
    compressed = tenalg.multi_mode_dot(Y, [U.basis for U in factors], skip=mode - 1, transpose=True)
    M = matricize(compressed, mode)
    if r > M.shape[1]:
        logger.debug("[HOSVD] r%d=%d exceeds %d compressed columns, keeping factor", mode, r, M.shape[1])
        return factors[mode - 1]
    return _leading_subspace(M, r)


def one_step_hosvd(Y, ranks) -> HOSVDResult:
    Y = as_tensor3(Y)
    ranks = _coerce_ranks(ranks)
    initial = hosvd_factors(Y, ranks)
    refined = tuple(_update_factor(Y, initial, k, r) for k, r in enumerate(ranks.as_tuple(), start=1))
    decomposition = project_onto(Y, refined)
    if ranks.as_tuple() == Y.shape:
        estimate = Y
    else:
        estimate = decomposition.reconstruct()
    logger.debug("[HOSVD] dims=%s ranks=%s done", Y.shape, ranks.as_tuple())
    return HOSVDResult(estimate, decomposition, initial, refined)


def one_step_hosvd_batch(items: Sequence[Tuple[np.ndarray, object]], max_workers: int = 1) -> List[HOSVDResult]:
    """Run one_step_hosvd over many (Y, ranks) pairs; output order follows input order."""
    if max_workers <= 1:
        return [one_step_hosvd(Y, ranks) for Y, ranks in items]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda item: one_step_hosvd(*item), items))


def hosvd_truncate(X, ranks) -> Tuple[np.ndarray, TuckerDecomposition]:
    """Stage-0 truncation X ×k P_{U_k^(0)} and its decomposition."""
    X = as_tensor3(X)
    decomposition = project_onto(X, hosvd_factors(X, ranks))
    return decomposition.reconstruct(), decomposition


def tucker_bias_bracket(X, ranks) -> BiasBracket:
    """
    lower: max_k of the rank-r_k tail of σ(M_k(X)); no Tucker-rank-(r)
           tensor can beat any single unfolding's Eckart-Young error.
    upper: error of the Stage-0 HOSVD truncation, a feasible point.
    """
    X = as_tensor3(X)
    ranks = _coerce_ranks(ranks)
    ranks.validate(X.shape)
    lower = max(
        tail_norm(unfolding_singular_values(X, k), r) for k, r in enumerate(ranks.as_tuple(), start=1)
    )
    estimate, _ = hosvd_truncate(X, ranks)
    upper = float(np.linalg.norm(X - estimate))
    if lower > upper:
        # both sides are within rounding of the same value
        logger.debug("[HOSVD] bias bracket rounding: lower %.3e > upper %.3e", lower, upper)
        upper = lower
    return BiasBracket(lower, upper)


def hooi_refine(X, ranks, max_iters: int = None, tol: float = None) -> HOOIResult:
    """
    Higher-order orthogonal iteration from the Stage-0 factors.

    Iteration 1 evaluates the initialization; every later iteration is
    one sweep of factor updates, each using the freshest other factors.
    A sweep that does not lower the error is discarded and stops the
    loop, so the recorded history is nonincreasing. The loop also stops
    once the relative improvement drops below tol.
    """
    max_iters = config["hooi"]["max_iters"] if max_iters is None else max_iters
    tol = config["hooi"]["tol"] if tol is None else tol
    if max_iters < 1:
        raise ParameterError(f"max_iters must be >= 1 (got {max_iters})")
    X = as_tensor3(X)
    ranks = _coerce_ranks(ranks)

    factors = hosvd_factors(X, ranks)
    best = project_onto(X, factors)
    error = float(np.linalg.norm(X - best.reconstruct()))
    history = [error]

    for iteration in range(2, max_iters + 1):
        candidate = list(factors)
        for k, r in enumerate(ranks.as_tuple(), start=1):
            candidate[k - 1] = _update_factor(X, tuple(candidate), k, r)
        decomposition = project_onto(X, tuple(candidate))
        new_error = float(np.linalg.norm(X - decomposition.reconstruct()))
        if new_error >= error:
            logger.debug("[HOOI] iteration %d did not improve (%.6e), stopping", iteration, new_error)
            break
        improvement = error - new_error
        factors, best, error = tuple(candidate), decomposition, new_error
        history.append(error)
        if improvement <= tol * max(history[-2], np.finfo(float).tiny):
            logger.debug("[HOOI] converged after %d iterations", iteration)
            break

    return HOOIResult(best, error, history)
