"""
Monte Carlo concentration check for the operator norm of a Gaussian
noise matrix, normalized by its typical size κ(√m + √n).
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from app.errors import ParameterError
from app.services.linalg import operator_norm
from app.services.rng import generator, standard_normal

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OpnormSummary:
    minimum: float
    median: float
    maximum: float
    q99: float
    values: np.ndarray

    def to_dict(self) -> dict:
        return {"min": self.minimum, "median": self.median, "max": self.maximum, "q99": self.q99}


def _trial(m: int, n: int, kappa: float, seed: int, t: int) -> float:
    Z = kappa * standard_normal(generator(seed, "opnorm", t), (m, n))
    if m == 1 and n == 1:
        raw = abs(float(Z[0, 0]))
    else:
        raw = operator_norm(Z)
    return raw / (kappa * (math.sqrt(m) + math.sqrt(n)))


def monte_carlo_opnorm(m: int, n: int, kappa: float, trials: int, seed: int, max_workers: int = 1) -> OpnormSummary:
    """
    Quantile summary of ||Z|| / (κ(√m + √n)) over `trials` i.i.d. N(0, κ²)
    draws. Trial t always uses the ("opnorm", t) stream of `seed`, so the
    summary does not depend on max_workers.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1 (got {trials})")
    if m < 1 or n < 1:
        raise ParameterError(f"dimensions must be >= 1 (got {m}x{n})")
    if not kappa > 0:
        raise ParameterError(f"kappa must be > 0 (got {kappa})")

    if max_workers <= 1:
        values = [_trial(m, n, kappa, seed, t) for t in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            values = list(pool.map(lambda t: _trial(m, n, kappa, seed, t), range(trials)))

    values = np.asarray(values)
    summary = OpnormSummary(
        minimum=float(values.min()),
        median=float(np.median(values)),
        maximum=float(values.max()),
        q99=float(np.quantile(values, 0.99)),
        values=values,
    )
    logger.debug("[Bounds] opnorm %dx%d over %d trials: median %.4f, q99 %.4f",
                 m, n, trials, summary.median, summary.q99)
    return summary
