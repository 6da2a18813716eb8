"""
Closed-Form Error Bounds

Evaluators for the theoretical quantities that accompany the
estimators. Universal constants are left out of every expression;
callers scale by a constant of their choice (BoundReport.total_upper)
or measure it empirically (empirical_constant).
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, NamedTuple, Sequence, Tuple

import numpy as np

from app.errors import ParameterError
from app.services.estimators import BiasBracket, TargetRanks, matrix_bias, tucker_bias_bracket
from app.services.linalg import as_matrix, singular_values
from app.services.tensor import as_tensor3, unfolding_singular_values

logger = logging.getLogger(__name__)

THM2_CONSTANT = 2.0 + math.sqrt(2.0)


def _positive(name: str, value: float):
    if not value > 0:
        raise ParameterError(f"{name} must be > 0 (got {value})")


def _nonnegative(name: str, value: float):
    if not value >= 0:
        raise ParameterError(f"{name} must be >= 0 (got {value})")


def _triple(name: str, values: Sequence[int]) -> Tuple[int, int, int]:
    values = tuple(int(v) for v in values)
    if len(values) != 3:
        raise ParameterError(f"{name} must have three entries (got {values})")
    for v in values:
        _positive(name, v)
    return values


def thm1_variance_term(kappa: float, dims: Sequence[int], ranks: Sequence[int]) -> float:
    """κ·sqrt(Σ p_k r_k + r1 r2 r3)."""
    _positive("kappa", kappa)
    p = _triple("dims", dims)
    r = _triple("ranks", ranks)
    dof = sum(pk * rk for pk, rk in zip(p, r)) + r[0] * r[1] * r[2]
    return kappa * math.sqrt(dof)


class SNRMargins(NamedTuple):
    margins: Tuple[float, float, float]
    threshold: float
    holds: bool


def _sigma_at(sigma: Sequence[float], index: int) -> float:
    """σ_index with 1-based index; entries past the end of the list read as 0."""
    return float(sigma[index - 1]) if index <= len(sigma) else 0.0


def snr_condition(
    sigma_per_mode: Sequence[Sequence[float]],
    ranks: Sequence[int],
    kappa: float,
    C_gap: float,
    dims: Sequence[int],
) -> SNRMargins:
    """
    margin_k = (σ_{r_k} - σ_{r_k+1})^2 - C_gap κ^2 (sqrt(p1 p2 p3 r_max) + Σ_k p_k r_max)

    The condition holds when every margin is nonnegative.
    """
    _nonnegative("kappa", kappa)
    _nonnegative("C_gap", C_gap)
    p = _triple("dims", dims)
    r = _triple("ranks", ranks)
    if len(sigma_per_mode) != 3:
        raise ParameterError("sigma_per_mode needs one spectrum per mode")
    r_max = max(r)
    threshold = C_gap * kappa ** 2 * (math.sqrt(p[0] * p[1] * p[2] * r_max) + sum(p) * r_max)
    margins = []
    for sigma, rk in zip(sigma_per_mode, r):
        sigma = [float(s) for s in sigma]
        if any(b > a for a, b in zip(sigma, sigma[1:])):
            raise ParameterError("each spectrum must be nonincreasing")
        gap = _sigma_at(sigma, rk) - _sigma_at(sigma, rk + 1)
        margins.append(gap ** 2 - threshold)
    margins = tuple(margins)
    return SNRMargins(margins, threshold, all(m >= 0 for m in margins))


def thm2_bound(r: int, z_opnorm: float, xi: float) -> float:
    """(2 + √2)(√r ||Z|| + ξ_(r)); ||Z|| is the realized operator norm."""
    _nonnegative("r", r)
    _nonnegative("z_opnorm", z_opnorm)
    _nonnegative("xi", xi)
    return THM2_CONSTANT * (math.sqrt(r) * z_opnorm + xi)


def _iid_rate(kappa: float, r: int, m: int, n: int) -> float:
    return kappa * math.sqrt(r * (m + n))


def _covariance_rate(kappa: float, r: int, n: int, N: int) -> float:
    ratio = n / N
    return kappa ** 2 * math.sqrt(r) * (math.sqrt(ratio) + ratio)


_RATES = {
    "iid-subgaussian": (_iid_rate, ("kappa", "r", "m", "n")),
    "subgaussian-matrix": (_iid_rate, ("kappa", "r", "m", "n")),
    "covariance": (_covariance_rate, ("kappa", "r", "n", "N")),
}


def corollary_rates(kind: str, **params) -> float:
    """
    Constant-free rate of the matrix corollaries.

      iid-subgaussian     κ sqrt(r (m + n))    params: kappa, r, m, n
      subgaussian-matrix  κ sqrt(r (m + n))    params: kappa, r, m, n
      covariance          κ² √r (sqrt(n/N) + n/N)   params: kappa, r, n, N
    """
    if kind not in _RATES:
        raise ParameterError(f"unknown rate kind {kind!r}; expected one of {sorted(_RATES)}")
    fn, names = _RATES[kind]
    missing = [name for name in names if name not in params]
    extra = sorted(set(params) - set(names))
    if missing or extra:
        raise ParameterError(f"{kind} rate takes {names} (missing {missing}, unexpected {extra})")
    for name in names:
        _positive(name, params[name])
    return fn(**{name: params[name] for name in names})


def sin_theta_bound_unbalanced(sigma: Sequence[float], r: int, kappa: float, n: int, m: int) -> float:
    """
    m κ^2 / Δ^2 + κ^4 n m / Δ^4 with Δ = σ_r - σ_{r+1}.

    Bound on the squared sin-Θ distance of the leading right singular
    subspace for an m x n observation with m possibly much smaller than n;
    the constant in front is not included.
    """
    _positive("kappa", kappa)
    _positive("n", n)
    _positive("m", m)
    if r < 1:
        raise ParameterError(f"r must be >= 1 (got {r})")
    sigma = [float(s) for s in sigma]
    delta = _sigma_at(sigma, r) - _sigma_at(sigma, r + 1)
    if delta <= 0:
        raise ParameterError(f"singular gap at r={r} is {delta}; the bound needs a positive gap")
    if math.isinf(delta):
        return 0.0
    return m * kappa ** 2 / delta ** 2 + kappa ** 4 * n * m / delta ** 4


@dataclass(frozen=True)
class BoundReport:
    variance_term: float
    bias: BiasBracket
    snr_margin: float
    kappa: float
    dims: Tuple[int, ...]
    ranks: Tuple[int, ...]

    def __post_init__(self):
        if self.variance_term < 0:
            raise ParameterError(f"variance term must be >= 0 (got {self.variance_term})")

    def total_upper(self, C: float = 1.0) -> float:
        """C·(variance_term + bias.upper); C stands in for the unspecified universal constant."""
        if C < 1:
            raise ParameterError(f"constant C must be >= 1 (got {C})")
        return C * (self.variance_term + self.bias.upper)

    def to_dict(self) -> Dict[str, object]:
        return {
            "variance_term": self.variance_term,
            "bias": self.bias.to_dict(),
            "snr_margin": self.snr_margin,
            "kappa": self.kappa,
            "dims": list(self.dims),
            "ranks": list(self.ranks),
        }


def bound_report(signal, kappa: float, ranks, C_gap: float = 1.0) -> BoundReport:
    """Variance term, certified bias bracket and worst SNR margin for a tensor signal."""
    X = as_tensor3(signal, "signal")
    ranks = ranks if isinstance(ranks, TargetRanks) else TargetRanks(*ranks)
    r = ranks.as_tuple()
    spectra = [unfolding_singular_values(X, k) for k in (1, 2, 3)]
    snr = snr_condition(spectra, r, kappa, C_gap, X.shape)
    report = BoundReport(
        variance_term=thm1_variance_term(kappa, X.shape, r),
        bias=tucker_bias_bracket(X, ranks),
        snr_margin=min(snr.margins),
        kappa=kappa,
        dims=X.shape,
        ranks=r,
    )
    logger.debug("[Bounds] tensor %s ranks %s: variance %.4g, bias [%.4g, %.4g]",
                 X.shape, r, report.variance_term, report.bias.lower, report.bias.upper)
    return report


def matrix_bound_report(signal, kappa: float, r: int, C_gap: float = 1.0) -> BoundReport:
    """
    Matrix analogue: the i.i.d. sub-Gaussian rate as variance term, the
    exact Eckart-Young bias, and the singular-gap margin
    Δ_r^2 - C_gap κ^2 (sqrt(mn) + m).
    """
    X = as_matrix(signal, "signal")
    m, n = X.shape
    if not 1 <= r <= min(m, n):
        raise ParameterError(f"rank r={r} outside [1, {min(m, n)}]")
    sigma = singular_values(X)
    gap = _sigma_at(sigma, r) - _sigma_at(sigma, r + 1)
    threshold = C_gap * kappa ** 2 * (math.sqrt(m * n) + m)
    return BoundReport(
        variance_term=corollary_rates("iid-subgaussian", kappa=kappa, r=r, m=m, n=n),
        bias=matrix_bias(sigma, r),
        snr_margin=gap ** 2 - threshold,
        kappa=kappa,
        dims=(m, n),
        ranks=(r,),
    )


def empirical_constant(errors: Sequence[float], variance_terms: Sequence[float], biases: Sequence[float]) -> float:
    """max_i error_i / (variance_i + bias_i): the smallest C that makes every bound hold."""
    errors = np.asarray(errors, dtype=np.float64)
    scale = np.asarray(variance_terms, dtype=np.float64) + np.asarray(biases, dtype=np.float64)
    if errors.shape != scale.shape or errors.ndim != 1 or errors.size == 0:
        raise ParameterError("errors, variance terms and biases must be equal-length non-empty sequences")
    if np.any(scale <= 0):
        raise ParameterError("every variance + bias must be > 0")
    return float(np.max(errors / scale))
