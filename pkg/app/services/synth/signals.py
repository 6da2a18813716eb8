"""
Synthetic Signals and Noise

Seeded generators for the simulation designs:

  matrix   X* = U diag(β^1..β^n) V^T, U m x n and V n x n orthonormal,
           rescaled so ||X*||_F = λ √(mn)
  tensor   X* = G ×1 U1 ×2 U2 ×3 U3 with superdiagonal core G_iii = β^i
           (s x s x s), U_k p x s orthonormal, rescaled so ||X*||_F = λ √(p^3)
  noise    i.i.d. N(0, κ^2) entries (or κ·Rademacher)

Each draw uses its own stream of the shared Philox generator:
"signal-U", "signal-V", "signal-U1".."signal-U3", "noise",
"covariance-V", "covariance-samples"; all keyed by (seed, replicate).
Signal and noise streams never coincide, so replicates never reuse noise.
"""

import json
import logging
from dataclasses import asdict, dataclass
from typing import Sequence, Tuple

import numpy as np

from app.config import config
from app.errors import ParameterError
from app.services.linalg import random_orthonormal
from app.services.rng import generator, rademacher, standard_normal
from app.services.tensor import TuckerDecomposition, as_tensor3, tucker_reconstruct

logger = logging.getLogger(__name__)

NOISE_FAMILIES = ("gaussian", "rademacher")


def _check_beta_lambda(beta: float, lam: float):
    if not 0 < beta < 1:
        raise ParameterError(f"beta must lie in (0, 1) (got {beta})")
    if not lam > 0:
        raise ParameterError(f"lambda must be > 0 (got {lam})")


class _JsonRecord:
    """JSON round-trip; the `lam` field is spelled "lambda" on the wire."""

    def to_dict(self) -> dict:
        data = asdict(self)
        if "lam" in data:
            data["lambda"] = data.pop("lam")
        return data

    @classmethod
    def from_dict(cls, data: dict):
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class MatrixSignalSpec(_JsonRecord):
    m: int
    n: int
    lam: float
    beta: float = config["synth"]["beta"]
    seed: int = 0

    def __post_init__(self):
        _check_beta_lambda(self.beta, self.lam)
        if not 1 <= self.n <= self.m:
            raise ParameterError(f"need 1 <= n <= m (got m={self.m}, n={self.n})")


@dataclass(frozen=True)
class TensorSignalSpec(_JsonRecord):
    p: int
    s: int
    lam: float
    beta: float = config["synth"]["beta"]
    seed: int = 0

    def __post_init__(self):
        _check_beta_lambda(self.beta, self.lam)
        if not 1 <= self.s <= self.p:
            raise ParameterError(f"need 1 <= s <= p (got p={self.p}, s={self.s})")


@dataclass(frozen=True)
class NoiseSpec(_JsonRecord):
    kappa: float = config["synth"]["kappa"]
    seed: int = 0
    family: str = "gaussian"
    antithetic: bool = False

    def __post_init__(self):
        if not self.kappa > 0:
            raise ParameterError(f"kappa must be > 0 (got {self.kappa})")
        if self.family not in NOISE_FAMILIES:
            raise ParameterError(f"noise family must be one of {NOISE_FAMILIES} (got {self.family!r})")


@dataclass(frozen=True)
class CovarianceSignalSpec(_JsonRecord):
    n: int
    samples: int
    lam: float
    beta: float = config["synth"]["beta"]
    seed: int = 0

    def __post_init__(self):
        _check_beta_lambda(self.beta, self.lam)
        if self.n < 1 or self.samples < 1:
            raise ParameterError(f"need n >= 1 and samples >= 1 (got {self.n}, {self.samples})")


def decay_spectrum(beta: float, length: int) -> np.ndarray:
    """β^1, ..., β^length (the first value is β, not 1)."""
    return beta ** np.arange(1, length + 1, dtype=np.float64)


def _rescale(X: np.ndarray, target: float) -> np.ndarray:
    return X * (target / np.linalg.norm(X))


def gen_matrix_signal(spec: MatrixSignalSpec, replicate: int = 0) -> np.ndarray:
    U = random_orthonormal(spec.m, spec.n, generator(spec.seed, "signal-U", replicate)).basis
    V = random_orthonormal(spec.n, spec.n, generator(spec.seed, "signal-V", replicate)).basis
    X = (U * decay_spectrum(spec.beta, spec.n)) @ V.T
    return _rescale(X, spec.lam * np.sqrt(spec.m * spec.n))


def tensor_signal_decomposition(spec: TensorSignalSpec, replicate: int = 0) -> TuckerDecomposition:
    """Superdiagonal-core Tucker form of the tensor signal, core already scaled."""
    factors = tuple(
        random_orthonormal(spec.p, spec.s, generator(spec.seed, f"signal-U{k}", replicate))
        for k in (1, 2, 3)
    )
    gamma = decay_spectrum(spec.beta, spec.s)
    gamma *= spec.lam * np.sqrt(float(spec.p) ** 3) / np.linalg.norm(gamma)
    core = np.zeros((spec.s,) * 3)
    idx = np.arange(spec.s)
    core[idx, idx, idx] = gamma
    return TuckerDecomposition(core, factors)


def gen_tensor_signal(spec: TensorSignalSpec, replicate: int = 0) -> np.ndarray:
    X = tucker_reconstruct(tensor_signal_decomposition(spec, replicate))
    return as_tensor3(_rescale(X, spec.lam * np.sqrt(float(spec.p) ** 3)))


def _noise(shape: Tuple[int, ...], spec: NoiseSpec, replicate: int) -> np.ndarray:
    gen = generator(spec.seed, "noise", replicate)
    draw = standard_normal if spec.family == "gaussian" else rademacher
    Z = spec.kappa * draw(gen, shape)
    return -Z if spec.antithetic else Z


def gen_noise_tensor(dims: Sequence[int], spec: NoiseSpec, replicate: int = 0) -> np.ndarray:
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or min(dims) < 1:
        raise ParameterError(f"noise tensor dims must be three positive integers (got {dims})")
    return _noise(dims, spec, replicate)


def gen_noise_matrix(dims: Sequence[int], spec: NoiseSpec, replicate: int = 0) -> np.ndarray:
    dims = tuple(int(d) for d in dims)
    if len(dims) != 2 or min(dims) < 1:
        raise ParameterError(f"noise matrix dims must be two positive integers (got {dims})")
    return _noise(dims, spec, replicate)


def gen_covariance_samples(spec: CovarianceSignalSpec, replicate: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Population covariance Σ = V diag(β^i) V^T rescaled to ||Σ||_F = λ, and
    `samples` Gaussian draws with that covariance, one per row.
    """
    V = random_orthonormal(spec.n, spec.n, generator(spec.seed, "covariance-V", replicate)).basis
    eig = decay_spectrum(spec.beta, spec.n)
    eig *= spec.lam / np.linalg.norm(eig)
    population = (V * eig) @ V.T
    population = (population + population.T) / 2.0
    G = standard_normal(generator(spec.seed, "covariance-samples", replicate), (spec.samples, spec.n))
    samples = (G * np.sqrt(eig)) @ V.T
    return population, samples
