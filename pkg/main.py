"""
tucker-denoise Command Line

Runs the synthetic denoising experiments and the supporting checks:

  simulate-matrix | simulate-tensor | simulate-cov   Monte Carlo grids
  reproduce-table2                                  published-table comparison
  bias-variance-sweep                               error vs rank, with theory
  denoise                                           one-step HOSVD on a DT3 file
  check-bounds                                      randomized inequality battery

Exit codes: 0 ok, 1 tolerance or check failure, 2 usage error, 3 resource guard.
"""

import argparse
import logging
import sys
from typing import List, Optional

from app.config import config, validate_config
from app.errors import ConfigError, FormatError, ParameterError, ResourceGuardError, TuckerDenoiseError
from app.services.bench import (
    ExperimentSpec,
    TolerancePolicy,
    bias_variance_sweep,
    check_bounds,
    denoise_file,
    lambda_monotonicity,
    load_specs,
    reproduce_table2,
    run_grid,
    table2_specs,
    write_comparison,
    write_json,
    write_summary,
    write_sweep,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3

# (n, N) cells and ranks used by simulate-cov when no grid is given
DEFAULT_COVARIANCE_GRID = (((50, 200), (5, 10)), ((50, 800), (5, 10)))


# ─── Argument parsing ────────────────────────────────────────

def _int_list(text: str) -> List[int]:
    """'3,5,8' or a range '1-25'."""
    try:
        if "-" in text and "," not in text:
            lo, hi = (int(part) for part in text.split("-", 1))
            return list(range(lo, hi + 1))
        return [int(part) for part in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected integers like '3,5' or '1-25', got {text!r}") from exc


def _pair(text: str) -> tuple:
    values = _int_list(text)
    if len(values) != 2 or "-" in text:
        raise argparse.ArgumentTypeError(f"expected two integers like '50,25', got {text!r}")
    return tuple(values)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tucker-denoise", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--seed", type=int, default=None, help="base seed (default: TUCKER_SEED)")
    parser.add_argument("--replicates", type=int, default=None, help="replicates per cell (default: TUCKER_REPLICATES)")
    parser.add_argument("--out", default=None, help="output path; '.json' selects JSON, anything else CSV")
    parser.add_argument("--parallel", type=int, default=None, help="worker threads (default: TUCKER_PARALLEL)")
    parser.add_argument("--bounds", action="store_true", help="add theoretical bound columns")
    parser.add_argument("--no-timing", action="store_true", help="write wall times as 0 for byte-stable output")
    parser.add_argument("--log-level", default=None, help="logging level (default: LOG_LEVEL)")

    sub = parser.add_subparsers(dest="command", required=True)

    for name, kind in (("simulate-matrix", "matrix"), ("simulate-tensor", "tensor"), ("simulate-cov", "covariance")):
        cmd = sub.add_parser(name, help=f"run a {kind} experiment grid")
        cmd.add_argument("--grid", default=None, help="JSON file of experiment records")
        cmd.set_defaults(kind=kind)

    cmd = sub.add_parser("reproduce-table2", help="rerun the published grid and compare")
    cmd.add_argument("--panel", choices=("matrix", "tensor", "both"), default="both")
    cmd.add_argument("--tolerance-policy", default=None, help="JSON file overriding the tolerance policy")

    cmd = sub.add_parser("bias-variance-sweep", help="error and theory terms across ranks")
    cmd.add_argument("--kind", choices=("matrix", "tensor", "covariance"), default="tensor")
    cmd.add_argument("--dims", type=_pair, default=(50, 25), help="(p,s), (m,n) or (n,N)")
    cmd.add_argument("--lambda", dest="lam", type=float, default=10.0)
    cmd.add_argument("--kappa", type=float, default=config["synth"]["kappa"], help="0 for a noiseless sweep")
    cmd.add_argument("--beta", type=float, default=config["synth"]["beta"])
    cmd.add_argument("--ranks", type=_int_list, default=None, help="ranks to sweep (default: full range)")

    cmd = sub.add_parser("denoise", help="one-step HOSVD of a DT3 tensor file")
    cmd.add_argument("input")
    cmd.add_argument("output")
    cmd.add_argument("--ranks", required=True, help="'r1,r2,r3' or a single r")

    cmd = sub.add_parser("check-bounds", help="randomized inequality and identity checks")
    cmd.add_argument("--instances", type=int, default=200)
    cmd.add_argument("--opnorm-trials", type=int, default=100)

    return parser


# ─── Commands ────────────────────────────────────────────────

def _overrides(args) -> dict:
    return {"replicates": args.replicates, "seed": args.seed}


def _default_specs(kind: str, args) -> List[ExperimentSpec]:
    if kind in ("matrix", "tensor"):
        return table2_specs(kind, args.replicates, args.seed)
    extra = {k: v for k, v in _overrides(args).items() if v is not None}
    return [
        ExperimentSpec(kind="covariance", dims=dims, lam=lam, ranks=ranks, **extra)
        for lam in (10.0, 50.0)
        for dims, ranks in DEFAULT_COVARIANCE_GRID
    ]


def cmd_simulate(args) -> int:
    if args.grid:
        specs = load_specs(args.grid, **_overrides(args))
        wrong = [s.label for s in specs if s.kind != args.kind]
        if wrong:
            raise ParameterError(f"{args.command} got records of another kind: {wrong}")
    else:
        specs = _default_specs(args.kind, args)
    rows = run_grid(specs, parallelism=args.parallel, with_bounds=args.bounds)
    write_summary(rows, args.out, bounds=args.bounds, timing=not args.no_timing)
    violations = lambda_monotonicity(rows)
    if violations:
        logger.warning("⚠️ [Bench] Error did not decrease with lambda for %s", violations)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    policy = TolerancePolicy.from_json(args.tolerance_policy) if args.tolerance_policy else TolerancePolicy()
    result = reproduce_table2(
        panel=args.panel,
        replicates=args.replicates,
        seed=args.seed,
        parallelism=args.parallel,
        policy=policy,
        with_bounds=args.bounds,
    )
    write_comparison(result, args.out, bounds=args.bounds, timing=not args.no_timing)
    violations = lambda_monotonicity([item.row for item in result.rows])
    if violations:
        logger.warning("⚠️ [Table2] Error did not decrease with lambda for %s", violations)
    glyph = "✅" if result.all_passed else "❌"
    logger.info("%s [Table2] %.0f%% of cells within tolerance", glyph, 100 * result.pass_fraction)
    return EXIT_OK if result.all_passed else EXIT_FAILED


def cmd_sweep(args) -> int:
    extra = {k: v for k, v in _overrides(args).items() if v is not None}
    spec = ExperimentSpec(
        kind=args.kind, dims=args.dims, lam=args.lam, ranks=(1,), beta=args.beta, kappa=args.kappa, **extra
    )
    sweep = bias_variance_sweep(spec, ranks=args.ranks, parallelism=args.parallel)
    write_sweep(sweep, args.out)
    return EXIT_OK


def cmd_denoise(args) -> int:
    report = denoise_file(args.input, args.ranks, args.output)
    payload = report.to_dict()
    if args.no_timing:
        payload["wall_time_s"] = 0.0
    write_json(payload, args.out)
    return EXIT_OK


def cmd_check_bounds(args) -> int:
    seed = config["bench"]["seed"] if args.seed is None else args.seed
    results = check_bounds(instances=args.instances, seed=seed, opnorm_trials=args.opnorm_trials)
    write_json([item.to_dict() for item in results], args.out)
    return EXIT_OK if all(item.passed for item in results) else EXIT_FAILED


COMMANDS = {
    "simulate-matrix": cmd_simulate,
    "simulate-tensor": cmd_simulate,
    "simulate-cov": cmd_simulate,
    "reproduce-table2": cmd_reproduce,
    "bias-variance-sweep": cmd_sweep,
    "denoise": cmd_denoise,
    "check-bounds": cmd_check_bounds,
}


# ──────────────────────────────────────────────────────────────
# Main
# ──────────────────────────────────────────────────────────────

def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    level = (args.log_level or config["log_level"]).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s  %(message)s",
        datefmt="%H:%M:%S",
    )

    try:
        validate_config()
        if args.parallel is None:
            args.parallel = config["bench"]["parallel"]
        if args.parallel < 1:
            raise ParameterError(f"--parallel must be >= 1 (got {args.parallel})")
        if args.replicates is not None and args.replicates < 1:
            raise ParameterError(f"--replicates must be >= 1 (got {args.replicates})")
        logger.info("🚀 [App] %s (seed %s)", args.command,
                    config["bench"]["seed"] if args.seed is None else args.seed)
        return COMMANDS[args.command](args)
    except ResourceGuardError as exc:
        logger.error("❌ [App] Resource guard: %s", exc)
        return EXIT_RESOURCE
    except (ParameterError, ConfigError, FormatError) as exc:
        logger.error("❌ [App] %s", exc)
        return EXIT_USAGE
    except TuckerDenoiseError as exc:
        logger.error("❌ [App] %s", exc)
        return EXIT_FAILED


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n👋 Interrupted")
        sys.exit(130)
