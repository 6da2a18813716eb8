from .runner import (
    ExperimentSpec,
    SummaryRow,
    SweepRow,
    bias_variance_sweep,
    check_budget,
    draw_replicate,
    load_specs,
    mean_and_se,
    rel_err,
    run_grid,
    sweep_ranks,
)
from .table2 import (
    PUBLISHED,
    TABLE1,
    ComparisonRow,
    Table2Result,
    TolerancePolicy,
    compare,
    lambda_monotonicity,
    reproduce_table2,
    table2_specs,
)
from .denoise import DenoiseReport, denoise_file
from .report import write_comparison, write_json, write_summary, write_sweep
from .checks import CHECKS, CheckResult, check_bounds
