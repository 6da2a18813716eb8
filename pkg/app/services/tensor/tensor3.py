"""
Third-Order Tensors

A Tensor3 is a C-ordered float64 array of shape (p1, p2, p3), so the
flat layout has i3 fastest, then i2, then i1.

Unfoldings are tensorly's `unfold`, whose column order is cyclic:
  mode 1: p1 x p2p3, column (i2, i3) with i3 fastest
  mode 2: p2 x p1p3, column (i1, i3) with i3 fastest
  mode 3: p3 x p1p2, column (i1, i2) with i2 fastest
With this order M1(X)(A ⊗ B) = M1(X ×2 A^T ×3 B^T), and likewise for the
other modes, which is what the one-step HOSVD relies on.

Mode products act on the left of the unfolding:
  matricize(X ×k M, k) = M · matricize(X, k).
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
import tensorly as tl
from tensorly import tenalg

from app.config import config
from app.errors import ParameterError
from app.services.linalg import as_matrix, singular_values

logger = logging.getLogger(__name__)

Dims = Tuple[int, int, int]


def as_tensor3(X, name: str = "tensor") -> np.ndarray:
    """Validate and freeze a third-order tensor argument."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 3 or min(arr.shape) < 1:
        raise ParameterError(f"{name} must be a non-empty 3-D array (got shape {arr.shape})")
    check_entry_count(arr.shape, name)
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains NaN or Inf entries")
    if arr.flags.writeable or not arr.flags.c_contiguous:
        arr = np.array(arr, dtype=np.float64, order="C", copy=True)
        arr.setflags(write=False)
    return arr


def check_entry_count(dims: Sequence[int], name: str = "tensor") -> int:
    entries = int(np.prod([int(d) for d in dims], dtype=object))
    if entries > config["limits"]["max_tensor_entries"]:
        raise ParameterError(f"{name} with dims {tuple(dims)} has {entries} entries, above the 2^31 cap")
    return entries


def _check_mode(mode) -> int:
    """1-based mode to tensorly's 0-based axis."""
    if mode not in (1, 2, 3):
        raise ParameterError(f"mode must be 1, 2 or 3 (got {mode!r})")
    return int(mode) - 1


def matricize(X, mode: int) -> np.ndarray:
    """Mode-k unfolding (p_k rows)."""
    axis = _check_mode(mode)
    X = as_tensor3(X)
    return np.ascontiguousarray(tl.unfold(X, axis))


def tensorize(M, mode: int, dims: Sequence[int]) -> np.ndarray:
    """Inverse of matricize for a tensor of the given dims."""
    axis = _check_mode(mode)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or min(dims) < 1:
        raise ParameterError(f"dims must be three positive integers (got {dims})")
    M = as_matrix(M)
    if M.shape != (dims[axis], int(np.prod(dims)) // dims[axis]):
        raise ParameterError(
            f"matrix of shape {M.shape} cannot be folded along mode {mode} into dims {dims}"
        )
    return as_tensor3(tl.fold(M, axis, dims))


def mode_product(X, mode: int, M) -> np.ndarray:
    """X ×_mode M; the result's extent along `mode` is M's row count."""
    axis = _check_mode(mode)
    X = as_tensor3(X)
    M = as_matrix(M, "mode-product matrix")
    if M.shape[1] != X.shape[axis]:
        raise ParameterError(
            f"mode-{mode} product needs {X.shape[axis]} columns, matrix is {M.shape[0]}x{M.shape[1]}"
        )
    return as_tensor3(tenalg.mode_dot(X, M, axis))


def mode_products(X, matrices: Sequence[Optional[np.ndarray]]) -> np.ndarray:
    """Apply X ×1 M1 ×2 M2 ×3 M3 in mode order; None entries are skipped."""
    if len(matrices) != 3:
        raise ParameterError(f"expected three matrices (or None), got {len(matrices)}")
    X = as_tensor3(X)
    modes, used = [], []
    for axis, M in enumerate(matrices):
        if M is None:
            continue
        M = as_matrix(M, "mode-product matrix")
        if M.shape[1] != X.shape[axis]:
            raise ParameterError(
                f"mode-{axis + 1} product needs {X.shape[axis]} columns, matrix is {M.shape[0]}x{M.shape[1]}"
            )
        modes.append(axis)
        used.append(M)
    if not used:
        return X
    return as_tensor3(tenalg.multi_mode_dot(X, used, modes=modes))


def tensor_norm(X) -> float:
    X = as_tensor3(X)
    return float(np.sqrt(np.sum(X * X)))


def unfolding_singular_values(X, mode: int) -> np.ndarray:
    return singular_values(matricize(X, mode))


def tucker_rank(X, tol: float = None) -> Dims:
    """Per-mode count of σ_i(M_k(X)) > tol · σ_1(M_k(X)); zero tensor gives (0, 0, 0)."""
    tol = config["tolerances"]["rank_tol"] if tol is None else tol
    if tol < 0:
        raise ParameterError(f"tol must be >= 0 (got {tol})")
    X = as_tensor3(X)
    ranks = []
    for mode in (1, 2, 3):
        s = unfolding_singular_values(X, mode)
        ranks.append(0 if s[0] == 0 else int(np.count_nonzero(s > tol * s[0])))
    return tuple(ranks)
