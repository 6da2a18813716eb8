"""
Published Benchmark Comparison

The reference grid (p, s) -> evaluated ranks, the published mean and
standard error of the relative Frobenius error for every cell, and the
tolerance policy that decides whether a reproduced cell agrees.

Tensor cells use p x p x p observations at Tucker rank (r, r, r);
matrix cells use m = 5p, n = s at rank r.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from app.config import config
from app.errors import ParameterError
from app.services.bench.runner import ExperimentSpec, SummaryRow, run_grid

logger = logging.getLogger(__name__)

PANELS = ("matrix", "tensor")
LAMBDAS = (10.0, 50.0)

# (p, s) -> ranks evaluated in that cell
TABLE1: Dict[Tuple[int, int], Tuple[int, int]] = {
    (20, 15): (10, 12),
    (50, 25): (10, 15),
    (75, 20): (10, 15),
    (100, 80): (30, 40),
}

# (panel, lambda, dim1, dim2, r) -> (mean, se)
PUBLISHED: Dict[Tuple[str, float, int, int, int], Tuple[float, float]] = {
    ("matrix", 10.0, 100, 15, 10): (0.1178, 0.00125),
    ("matrix", 10.0, 100, 15, 12): (0.0906, 0.00164),
    ("matrix", 10.0, 250, 25, 10): (0.1254, 0.00044),
    ("matrix", 10.0, 250, 25, 15): (0.0868, 0.00077),
    ("matrix", 10.0, 375, 20, 10): (0.1279, 0.00045),
    ("matrix", 10.0, 375, 20, 15): (0.0927, 0.00076),
    ("matrix", 10.0, 500, 80, 30): (0.0698, 0.00032),
    ("matrix", 10.0, 500, 80, 40): (0.0795, 0.00035),
    ("matrix", 50.0, 100, 15, 10): (0.0844, 0.00007),
    ("matrix", 50.0, 100, 15, 12): (0.0181, 0.00037),
    ("matrix", 50.0, 250, 25, 10): (0.1079, 0.00002),
    ("matrix", 50.0, 250, 25, 15): (0.0378, 0.00009),
    ("matrix", 50.0, 375, 20, 10): (0.1068, 0.00002),
    ("matrix", 50.0, 375, 20, 15): (0.0349, 0.00008),
    ("matrix", 50.0, 500, 80, 30): (0.0134, 0.00008),
    ("matrix", 50.0, 500, 80, 40): (0.0156, 0.00006),
    ("tensor", 10.0, 20, 15, 10): (0.1092, 0.00031),
    ("tensor", 10.0, 20, 15, 12): (0.0776, 0.00058),
    ("tensor", 10.0, 50, 25, 10): (0.1081, 0.00002),
    ("tensor", 10.0, 50, 25, 15): (0.0402, 0.00012),
    ("tensor", 10.0, 75, 20, 10): (0.1081, 0.00002),
    ("tensor", 10.0, 75, 20, 15): (0.0353, 0.00004),
    ("tensor", 10.0, 100, 80, 30): (0.0204, 0.00007),
    ("tensor", 10.0, 100, 80, 40): (0.0294, 0.00007),
    ("tensor", 50.0, 20, 15, 10): (0.1018, 0.00001),
    ("tensor", 50.0, 20, 15, 12): (0.0599, 0.00002),
    ("tensor", 50.0, 50, 25, 10): (0.1073, 0.00000),
    ("tensor", 50.0, 50, 25, 15): (0.0352, 0.00000),
    ("tensor", 50.0, 75, 20, 10): (0.1067, 0.00000),
    ("tensor", 50.0, 75, 20, 15): (0.0333, 0.00000),
    ("tensor", 50.0, 100, 80, 30): (0.0039, 0.00001),
    ("tensor", 50.0, 100, 80, 40): (0.0058, 0.00001),
}


@dataclass(frozen=True)
class TolerancePolicy:
    """A cell passes iff |ours - published| <= max(k·se, floor, fraction·published)."""

    se_multiplier: float = config["tolerance_policy"]["se_multiplier"]
    abs_floor: float = config["tolerance_policy"]["abs_floor"]
    rel_fraction: float = config["tolerance_policy"]["rel_fraction"]

    def __post_init__(self):
        if min(self.se_multiplier, self.abs_floor, self.rel_fraction) < 0:
            raise ParameterError("tolerance policy entries must be >= 0")

    def tolerance(self, paper_mean: float, paper_se: float) -> float:
        return max(self.se_multiplier * paper_se, self.abs_floor, self.rel_fraction * paper_mean)

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "TolerancePolicy":
        try:
            data = json.loads(Path(path).read_text())
            return cls(**data)
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise ParameterError(f"cannot read tolerance policy {path}: {exc}") from exc


@dataclass(frozen=True)
class ComparisonRow:
    row: SummaryRow
    paper_mean: float
    paper_se: float
    abs_diff: float
    tolerance: float
    passed: bool

    @property
    def signed_diff(self) -> float:
        return self.row.mean_relerr - self.paper_mean

    def to_dict(self) -> dict:
        data = self.row.to_dict()
        data.update({
            "paper_mean": self.paper_mean,
            "paper_se": self.paper_se,
            "abs_diff": self.abs_diff,
            "tolerance": self.tolerance,
            "pass": self.passed,
        })
        return data


@dataclass(frozen=True)
class Table2Result:
    rows: Tuple[ComparisonRow, ...]

    @property
    def all_passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def pass_fraction(self) -> float:
        return sum(row.passed for row in self.rows) / len(self.rows) if self.rows else 0.0

    @property
    def one_sided(self) -> bool:
        """Every cell deviates in the same direction: a systematic offset rather than noise."""
        diffs = [row.signed_diff for row in self.rows]
        return len(diffs) > 1 and (all(d > 0 for d in diffs) or all(d < 0 for d in diffs))

    @property
    def exit_status(self) -> int:
        return 0 if self.all_passed else 1


def published_key(row: SummaryRow) -> Tuple[str, float, int, int, int]:
    spec = row.spec
    return (spec.kind, float(spec.lam), spec.dims[0], spec.dims[1], row.rank)


def table2_specs(
    panel: str = "both",
    replicates: Optional[int] = None,
    seed: Optional[int] = None,
) -> List[ExperimentSpec]:
    panels = PANELS if panel == "both" else (panel,)
    if any(p not in PANELS for p in panels):
        raise ParameterError(f"panel must be one of {PANELS + ('both',)} (got {panel!r})")
    extra = {}
    if replicates is not None:
        extra["replicates"] = replicates
    if seed is not None:
        extra["seed"] = seed
    specs = []
    for kind in panels:
        for lam in LAMBDAS:
            for (p, s), ranks in TABLE1.items():
                dims = (5 * p, s) if kind == "matrix" else (p, s)
                specs.append(ExperimentSpec(kind=kind, dims=dims, lam=lam, ranks=ranks, **extra))
    return specs


def compare(rows: Sequence[SummaryRow], policy: Optional[TolerancePolicy] = None) -> Table2Result:
    """Pair each row with its published cell; rows without one are skipped."""
    policy = policy or TolerancePolicy()
    compared = []
    for row in rows:
        key = published_key(row)
        if key not in PUBLISHED:
            logger.warning("⚠️ [Table2] No published value for %s r=%d", row.spec.label, row.rank)
            continue
        mean, se = PUBLISHED[key]
        diff = abs(row.mean_relerr - mean)
        tol = policy.tolerance(mean, se)
        compared.append(ComparisonRow(row, mean, se, diff, tol, diff <= tol))
        glyph = "✅" if diff <= tol else "❌"
        logger.info("%s [Table2] %s r=%d: ours %.4f vs published %.4f (|diff| %.4f, tol %.4f)",
                    glyph, row.spec.label, row.rank, row.mean_relerr, mean, diff, tol)
    return Table2Result(tuple(compared))


def reproduce_table2(
    panel: str = "both",
    replicates: Optional[int] = None,
    seed: Optional[int] = None,
    parallelism: int = 1,
    policy: Optional[TolerancePolicy] = None,
    budget: Optional[int] = None,
    with_bounds: bool = False,
) -> Table2Result:
    specs = table2_specs(panel, replicates, seed)
    rows = run_grid(specs, parallelism=parallelism, budget=budget, with_bounds=with_bounds)
    result = compare(rows, policy)
    logger.info("📊 [Table2] %d/%d cells within tolerance", sum(r.passed for r in result.rows), len(result.rows))
    if result.one_sided:
        logger.warning("⚠️ [Table2] Every cell deviates in the same direction")
    return result


def lambda_monotonicity(rows: Sequence[SummaryRow]) -> List[Tuple[str, Tuple[int, int], int]]:
    """
    (kind, dims, r) groups whose mean error does not strictly decrease as
    lambda grows. Groups observed at a single lambda are ignored.
    """
    groups: Dict[Tuple[str, Tuple[int, int], int], List[Tuple[float, float]]] = {}
    for row in rows:
        key = (row.spec.kind, row.spec.dims, row.rank)
        groups.setdefault(key, []).append((row.spec.lam, row.mean_relerr))
    violations = []
    for key, points in groups.items():
        points.sort()
        if any(later >= earlier for (_, earlier), (_, later) in zip(points, points[1:])):
            violations.append(key)
    return violations
