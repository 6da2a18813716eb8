"""
Randomized Bound Checks

The battery behind `check-bounds`: each check draws independent random
instances from its own stream and counts the ones that violate a
deterministic inequality or identity. A correct build reports zero
violations everywhere.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from app.config import config
from app.services.bounds import monte_carlo_opnorm, thm2_bound
from app.services.estimators import TargetRanks, one_step_hosvd, truncated_svd_estimate
from app.services.linalg import (
    frobenius_lower_bound_slack,
    kronecker,
    operator_norm,
    perturbation_approx_slack,
    perturbation_inequalities_report,
    product_singular_value_slacks,
    random_orthonormal,
    singular_values,
    tail_norm,
)
from app.services.rng import generator, standard_normal, uniform
from app.services.tensor import TuckerDecomposition, matricize, mode_products, tucker_reconstruct

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    instances: int
    violations: int
    worst: float

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {"name": self.name, "instances": self.instances, "violations": self.violations, "worst": self.worst}


def _randint(gen: np.random.Generator, lo: int, hi: int) -> int:
    """Uniform integer in [lo, hi]."""
    return lo + min(int(uniform(gen, 1)[0] * (hi - lo + 1)), hi - lo)


def _gaussian(gen, *shape) -> np.ndarray:
    return standard_normal(gen, shape)


# ─── Individual checks ───────────────────────────────────────
# Each returns a slack: >= -tol passes (or an error for identity checks, <= tol passes).

def _perturbation(gen) -> float:
    m, n = _randint(gen, 2, 8), _randint(gen, 2, 8)
    A, B = _gaussian(gen, m, n), _gaussian(gen, m, n)
    return perturbation_inequalities_report(A, B, _randint(gen, 1, min(m, n))).min_slack()


def _perturbation_approx(gen) -> float:
    m, n = _randint(gen, 3, 10), _randint(gen, 3, 10)
    q = _randint(gen, 1, min(m, n))
    B = _gaussian(gen, m, q) @ _gaussian(gen, q, n) + 0.1 * _gaussian(gen, m, n)
    Z = _gaussian(gen, m, n) * float(uniform(gen, 1)[0])
    return perturbation_approx_slack(B, Z, _randint(gen, 1, min(m, n)))


def _frobenius_lower_bound(gen) -> float:
    n, m = _randint(gen, 1, 8), _randint(gen, 1, 8)
    return frobenius_lower_bound_slack(_gaussian(gen, n, m), _gaussian(gen, m, m))


def _product_singular_values(gen) -> float:
    n, m = _randint(gen, 1, 8), _randint(gen, 1, 8)
    return min(product_singular_value_slacks(_gaussian(gen, n, m), _gaussian(gen, m, m)).values())


def _truncation_bound(gen) -> float:
    """(2 + √2)(√r ||Z|| + ξ_(r)) - ||Y_(r) - X*||_F on full- and low-rank signals."""
    m, n = _randint(gen, 4, 12), _randint(gen, 4, 12)
    if _randint(gen, 0, 1):
        q = _randint(gen, 1, min(m, n))
        X = _gaussian(gen, m, q) @ _gaussian(gen, q, n)
    else:
        X = _gaussian(gen, m, n)
    X = X * (10.0 ** (2 * float(uniform(gen, 1)[0])))
    Z = _gaussian(gen, m, n)
    r = _randint(gen, 1, min(m, n))
    error = float(np.linalg.norm(truncated_svd_estimate(X + Z, r) - X))
    bound = thm2_bound(r, operator_norm(Z), tail_norm(singular_values(X), r))
    return bound + 1e-8 - error


def _tensor_recovery(gen) -> float:
    dims = tuple(_randint(gen, 3, 8) for _ in range(3))
    while True:
        ranks = tuple(_randint(gen, 1, min(3, p)) for p in dims)
        if all(ranks[k] <= ranks[k - 1] * ranks[k - 2] for k in range(3)):
            break
    factors = tuple(random_orthonormal(p, r, gen) for p, r in zip(dims, ranks))
    X = tucker_reconstruct(TuckerDecomposition(_gaussian(gen, *ranks), factors))
    estimate = one_step_hosvd(X, TargetRanks(*ranks)).estimate
    return float(np.linalg.norm(estimate - X) / np.linalg.norm(X))


def _matrix_recovery(gen) -> float:
    m, n = _randint(gen, 2, 12), _randint(gen, 2, 12)
    r = _randint(gen, 1, min(m, n))
    X = _gaussian(gen, m, r) @ _gaussian(gen, r, n)
    return float(np.linalg.norm(truncated_svd_estimate(X, r) - X) / np.linalg.norm(X))


def _eckart_young(gen) -> float:
    m, n = _randint(gen, 2, 12), _randint(gen, 2, 12)
    M = _gaussian(gen, m, n)
    r = _randint(gen, 1, min(m, n))
    residual = float(np.linalg.norm(M - truncated_svd_estimate(M, r)))
    tail = tail_norm(singular_values(M), r)
    return abs(residual - tail) / max(tail, float(np.linalg.norm(M)))


def _kronecker_compatibility(gen) -> float:
    p = tuple(_randint(gen, 1, 6) for _ in range(3))
    q2, q3 = _randint(gen, 1, 5), _randint(gen, 1, 5)
    X = _gaussian(gen, *p)
    A, B = _gaussian(gen, p[1], q2), _gaussian(gen, p[2], q3)
    lhs = matricize(X, 1) @ kronecker(A, B)
    rhs = matricize(mode_products(X, [None, A.T, B.T]), 1)
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), 1.0))


# name -> (check, "slack" or "error", tolerance)
CHECKS: Dict[str, tuple] = {
    "perturbation-inequalities": (_perturbation, "slack", config["tolerances"]["inequality_slack"]),
    "perturbation-approx": (_perturbation_approx, "slack", config["tolerances"]["inequality_slack"]),
    "frobenius-lower-bound": (_frobenius_lower_bound, "slack", config["tolerances"]["inequality_slack"]),
    "product-singular-values": (_product_singular_values, "slack", config["tolerances"]["inequality_slack"]),
    "truncation-bound": (_truncation_bound, "slack", 0.0),
    "tensor-exact-recovery": (_tensor_recovery, "error", 1e-9),
    "matrix-exact-recovery": (_matrix_recovery, "error", 1e-9),
    "eckart-young": (_eckart_young, "error", config["tolerances"]["reconstruction"]),
    "kronecker-compatibility": (_kronecker_compatibility, "error", 1e-10),
}


def run_check(name: str, instances: int, seed: int) -> CheckResult:
    fn, mode, tol = CHECKS[name]
    values = [fn(generator(seed, f"check-{name}", i)) for i in range(instances)]
    if mode == "slack":
        violations = sum(v < -tol for v in values)
        worst = min(values)
    else:
        violations = sum(v > tol for v in values)
        worst = max(values)
    result = CheckResult(name, instances, int(violations), float(worst))
    glyph = "✅" if result.passed else "❌"
    logger.info("%s [Bounds] %s: %d/%d violations (worst %.3e)", glyph, name, result.violations, instances, worst)
    return result


def check_bounds(
    instances: int = 200,
    seed: int = config["bench"]["seed"],
    opnorm_trials: int = 100,
    names: Optional[List[str]] = None,
) -> List[CheckResult]:
    """Run the battery; the last entry is the operator-norm concentration check."""
    results = [run_check(name, instances, seed) for name in (names or CHECKS)]
    if opnorm_trials > 0:
        summary = monte_carlo_opnorm(200, 200, 1.0, opnorm_trials, seed)
        results.append(CheckResult("opnorm-concentration", 1, int(summary.q99 > 1.5), summary.q99))
        logger.info("%s [Bounds] opnorm-concentration: q99 %.4f over %d trials",
                    "✅" if summary.q99 <= 1.5 else "❌", summary.q99, opnorm_trials)
    return results
