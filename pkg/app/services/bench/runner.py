"""
Experiment Runner

Monte Carlo harness over grids of synthetic denoising experiments:

  for each spec, replicate:  draw X*, draw Z, form Y = X* + Z
  for each rank r:           estimate, record ||X̃ - X*||_F / ||X*||_F
  per (spec, r) row:         sample mean and Bessel-corrected standard error

Replicates are independent tasks keyed by (row seed, replicate index),
so results do not depend on the number of workers; aggregation folds
the per-replicate errors in replicate-index order.
"""

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from app.config import config
from app.errors import ParameterError, ReplicateError, ResourceGuardError
from app.services.bounds import BoundReport, bound_report, corollary_rates, matrix_bound_report, thm1_variance_term
from app.services.estimators import (
    BiasBracket,
    TargetRanks,
    matrix_bias,
    one_step_hosvd,
    sample_cov_truncated,
    truncated_svd_estimate,
    tucker_bias_bracket,
)
from app.services.linalg import singular_values
from app.services.rng import derive_seed
from app.services.synth import (
    CovarianceSignalSpec,
    MatrixSignalSpec,
    NoiseSpec,
    TensorSignalSpec,
    gen_covariance_samples,
    gen_matrix_signal,
    gen_noise_matrix,
    gen_noise_tensor,
    gen_tensor_signal,
)

logger = logging.getLogger(__name__)

KINDS = ("matrix", "tensor", "covariance")


# ─── Experiment records ──────────────────────────────────────

@dataclass(frozen=True)
class ExperimentSpec:
    """
    One grid cell family. dims is (m, n) for matrix, (p, s) for tensor
    and (n, N) for covariance experiments; every rank in `ranks` becomes
    one summary row. kappa = 0 runs the estimator on the clean signal.
    """

    kind: str
    dims: Tuple[int, int]
    lam: float
    ranks: Tuple[int, ...]
    replicates: int = config["bench"]["replicates"]
    seed: int = config["bench"]["seed"]
    beta: float = config["synth"]["beta"]
    kappa: float = config["synth"]["kappa"]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "ranks", tuple(int(r) for r in self.ranks))
        if self.kind not in KINDS:
            raise ParameterError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if len(self.dims) != 2 or min(self.dims) < 1:
            raise ParameterError(f"dims must be two positive integers (got {self.dims})")
        if self.replicates < 1:
            raise ParameterError(f"replicates must be >= 1 (got {self.replicates})")
        if not self.ranks:
            raise ParameterError("at least one rank is required")
        if self.kappa < 0:
            raise ParameterError(f"kappa must be >= 0 (got {self.kappa})")
        d1, d2 = self.dims
        if self.kind == "matrix" and d2 > d1:
            raise ParameterError(f"matrix experiments need n <= m (got {self.dims})")
        if self.kind == "tensor" and d2 > d1:
            raise ParameterError(f"tensor experiments need s <= p (got {self.dims})")
        limit = d2 if self.kind == "matrix" else d1
        for r in self.ranks:
            if not 1 <= r <= limit:
                raise ParameterError(f"rank {r} outside [1, {limit}] for {self.label}")

    @property
    def label(self) -> str:
        return f"{self.kind}-lambda{self.lam:g}-{self.dims[0]}x{self.dims[1]}"

    @property
    def row_seed(self) -> int:
        return derive_seed(self.seed, self.label)

    @property
    def dense_entries(self) -> int:
        d1, d2 = self.dims
        if self.kind == "tensor":
            return d1 ** 3
        if self.kind == "covariance":
            return d1 * d2 + d1 * d1
        return d1 * d2

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dims": list(self.dims),
            "lambda": self.lam,
            "ranks": list(self.ranks),
            "replicates": self.replicates,
            "seed": self.seed,
            "beta": self.beta,
            "kappa": self.kappa,
        }

    @classmethod
    def from_dict(cls, data: dict, **overrides) -> "ExperimentSpec":
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        data.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**data)
        except TypeError as exc:
            raise ParameterError(f"bad experiment record {data}: {exc}") from exc


def load_specs(path: Union[str, Path], **overrides) -> List[ExperimentSpec]:
    """Read a JSON list of experiment records (or {"specs": [...]})."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot read grid file {path}: {exc}") from exc
    if isinstance(data, dict):
        data = data.get("specs", [])
    if not isinstance(data, list) or not data:
        raise ParameterError(f"grid file {path} holds no experiment records")
    return [ExperimentSpec.from_dict(item, **overrides) for item in data]


@dataclass(frozen=True)
class SummaryRow:
    spec: ExperimentSpec
    rank: int
    mean_relerr: float
    se_relerr: float
    n_replicates: int
    wall_time_seconds: float
    errors: Tuple[float, ...] = field(default=(), repr=False)
    bounds: Optional[BoundReport] = None

    def __post_init__(self):
        if self.mean_relerr < 0 or self.se_relerr < 0:
            raise ParameterError("mean and standard error must be >= 0")

    def to_dict(self) -> dict:
        data = {
            "spec": self.spec.to_dict(),
            "rank": self.rank,
            "mean_relerr": self.mean_relerr,
            "se_relerr": self.se_relerr,
            "n_replicates": self.n_replicates,
            "wall_time_seconds": self.wall_time_seconds,
        }
        if self.bounds is not None:
            data["bounds"] = self.bounds.to_dict()
        return data


@dataclass(frozen=True)
class SweepRow:
    rank: int
    mean_relerr: float
    se_relerr: float
    variance_term: float
    bias: BiasBracket

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "mean_relerr": self.mean_relerr,
            "se_relerr": self.se_relerr,
            "variance_term": self.variance_term,
            "bias": self.bias.to_dict(),
        }


# ─── Statistics ──────────────────────────────────────────────

def rel_err(estimate, truth) -> float:
    """||estimate - truth||_F / ||truth||_F."""
    estimate = np.asarray(estimate, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if estimate.shape != truth.shape:
        raise ParameterError(f"shape mismatch: estimate {estimate.shape} vs truth {truth.shape}")
    scale = float(np.linalg.norm(truth))
    if scale == 0:
        raise ParameterError("relative error is undefined for a zero truth")
    return float(np.linalg.norm(estimate - truth)) / scale


def mean_and_se(values: Sequence[float]) -> Tuple[float, float]:
    """Sample mean and std/√R with Bessel correction; a single value has se 0."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ParameterError("cannot summarise an empty sample")
    mean = float(np.mean(values))
    if values.size == 1:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / np.sqrt(values.size))


# ─── Single replicate ────────────────────────────────────────

def draw_replicate(spec: ExperimentSpec, replicate: int, seed: Optional[int] = None):
    """
    (truth, observation) for one replicate. For covariance experiments the
    observation is the N x n sample matrix rather than a noisy copy.
    """
    seed = spec.row_seed if seed is None else seed
    d1, d2 = spec.dims
    if spec.kind == "covariance":
        cov_spec = CovarianceSignalSpec(n=d1, samples=d2, lam=spec.lam, beta=spec.beta, seed=seed)
        return gen_covariance_samples(cov_spec, replicate)
    if spec.kind == "matrix":
        X = gen_matrix_signal(MatrixSignalSpec(m=d1, n=d2, lam=spec.lam, beta=spec.beta, seed=seed), replicate)
        noise = gen_noise_matrix
    else:
        X = gen_tensor_signal(TensorSignalSpec(p=d1, s=d2, lam=spec.lam, beta=spec.beta, seed=seed), replicate)
        noise = gen_noise_tensor
    if spec.kappa == 0:
        return X, X
    return X, X + noise(X.shape, NoiseSpec(kappa=spec.kappa, seed=seed), replicate)


def estimate(spec: ExperimentSpec, observation: np.ndarray, r: int) -> np.ndarray:
    if spec.kind == "tensor":
        return one_step_hosvd(observation, TargetRanks.uniform(r)).estimate
    if spec.kind == "matrix":
        return truncated_svd_estimate(observation, r)
    return sample_cov_truncated(observation, r)[0]


def _run_replicate(spec: ExperimentSpec, replicate: int) -> Tuple[List[float], List[float]]:
    truth, observation = draw_replicate(spec, replicate)
    errors, seconds = [], []
    for r in spec.ranks:
        started = time.perf_counter()
        errors.append(rel_err(estimate(spec, observation, r), truth))
        seconds.append(time.perf_counter() - started)
    return errors, seconds


def row_bounds(spec: ExperimentSpec, truth: np.ndarray, r: int) -> Optional[BoundReport]:
    """Theoretical components for one row; None for noiseless runs."""
    if spec.kind == "tensor":
        if spec.kappa == 0:
            return None
        return bound_report(truth, spec.kappa, TargetRanks.uniform(r))
    if spec.kind == "matrix":
        if spec.kappa == 0:
            return None
        return matrix_bound_report(truth, spec.kappa, r)
    n, N = spec.dims
    sigma = singular_values(truth)
    return BoundReport(
        variance_term=corollary_rates("covariance", kappa=1.0, r=r, n=n, N=N),
        bias=matrix_bias(sigma, r),
        snr_margin=float("nan"),
        kappa=1.0,
        dims=(n, N),
        ranks=(r,),
    )


# ─── Grid execution ──────────────────────────────────────────

def check_budget(specs: Sequence[ExperimentSpec], budget: Optional[int] = None):
    budget = config["limits"]["entry_budget"] if budget is None else budget
    for spec in specs:
        if spec.dense_entries > budget:
            raise ResourceGuardError(
                f"cell {spec.label} needs {spec.dense_entries} dense entries, above the budget of {budget}",
                cell=spec.label,
            )


def run_grid(
    specs: Sequence[ExperimentSpec],
    parallelism: int = 1,
    budget: Optional[int] = None,
    on_error: str = "raise",
    with_bounds: bool = False,
) -> List[SummaryRow]:
    """
    Run every (spec, replicate) and summarise each (spec, r).

    on_error="raise" stops at the first failed replicate with a
    ReplicateError; "skip" drops the failing spec's rows and goes on.
    """
    if on_error not in ("raise", "skip"):
        raise ParameterError(f"on_error must be 'raise' or 'skip' (got {on_error!r})")
    if parallelism < 1:
        raise ParameterError(f"parallelism must be >= 1 (got {parallelism})")
    specs = list(specs)
    check_budget(specs, budget)

    tasks = [(i, rep) for i, spec in enumerate(specs) for rep in range(spec.replicates)]

    def work(task):
        i, rep = task
        try:
            return _run_replicate(specs[i], rep)
        except Exception as exc:
            return ReplicateError(specs[i].label, rep, exc)

    logger.info("🧪 [Bench] Running %d replicates across %d experiment(s) on %d worker(s)",
                len(tasks), len(specs), parallelism)
    if parallelism == 1:
        outcomes = [work(task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(work, tasks))

    rows: List[SummaryRow] = []
    cursor = 0
    for spec in specs:
        results = outcomes[cursor:cursor + spec.replicates]
        cursor += spec.replicates
        failure = next((res for res in results if isinstance(res, ReplicateError)), None)
        if failure is not None:
            logger.error("❌ [Bench] %s", failure)
            if on_error == "raise":
                raise failure from failure.cause
            continue
        truth = draw_replicate(spec, 0)[0] if with_bounds else None
        for j, r in enumerate(spec.ranks):
            errors = [res[0][j] for res in results]
            mean, se = mean_and_se(errors)
            row = SummaryRow(
                spec=spec,
                rank=r,
                mean_relerr=mean,
                se_relerr=se,
                n_replicates=spec.replicates,
                wall_time_seconds=float(sum(res[1][j] for res in results)),
                errors=tuple(errors),
                bounds=row_bounds(spec, truth, r) if with_bounds else None,
            )
            rows.append(row)
            logger.info("✅ [Bench] %s r=%d: mean %.4f (se %.5f) over %d replicates",
                        spec.label, r, mean, se, spec.replicates)
    return rows


# ─── Bias-variance sweep ─────────────────────────────────────

def _variance_term(spec: ExperimentSpec, r: int) -> float:
    d1, d2 = spec.dims
    if spec.kind == "covariance":
        return corollary_rates("covariance", kappa=1.0, r=r, n=d1, N=d2)
    if spec.kappa == 0:
        return 0.0
    if spec.kind == "tensor":
        return thm1_variance_term(spec.kappa, (d1, d1, d1), (r, r, r))
    return corollary_rates("iid-subgaussian", kappa=spec.kappa, r=r, m=d1, n=d2)


def _bias(spec: ExperimentSpec, truth: np.ndarray, r: int) -> BiasBracket:
    if spec.kind == "tensor":
        return tucker_bias_bracket(truth, TargetRanks.uniform(r))
    return matrix_bias(singular_values(truth), r)


def sweep_ranks(spec: ExperimentSpec) -> Tuple[int, ...]:
    """Full rank range: 1..s for tensors, 1..n for matrices and covariances."""
    d1, d2 = spec.dims
    return tuple(range(1, (d2 if spec.kind != "covariance" else d1) + 1))


def bias_variance_sweep(
    spec: ExperimentSpec,
    ranks: Optional[Sequence[int]] = None,
    parallelism: int = 1,
    budget: Optional[int] = None,
) -> List[SweepRow]:
    """
    Empirical error for each rank next to the theoretical variance term
    and the absolute bias bracket of the replicate-0 signal (signal
    spectra do not change across replicates).
    """
    ranks = sweep_ranks(spec) if ranks is None else tuple(ranks)
    spec = replace(spec, ranks=ranks)
    rows = run_grid([spec], parallelism=parallelism, budget=budget)
    truth = draw_replicate(spec, 0)[0]
    sweep = [
        SweepRow(row.rank, row.mean_relerr, row.se_relerr, _variance_term(spec, row.rank), _bias(spec, truth, row.rank))
        for row in rows
    ]
    best = min(sweep, key=lambda item: item.mean_relerr)
    logger.info("📈 [Bench] %s sweep over %d ranks: best r=%d (mean %.4f)",
                spec.label, len(sweep), best.rank, best.mean_relerr)
    return sweep
