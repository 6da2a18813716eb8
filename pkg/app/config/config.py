"""
Central configuration for tucker-denoise.
Loads settings from environment variables and defines defaults for the
numerical kernels, the synthetic generators and the experiment harness.
Every tolerance the library compares against lives here.
"""

import os

from dotenv import load_dotenv

from app.errors import ConfigError

load_dotenv()

config = {
    # ─── NUMERICAL TOLERANCES ─────────────────────────────────
    "tolerances": {
        "orthonormality": 1e-10,
        "reconstruction": 1e-8,
        "inequality_slack": 1e-9,
        "bracket_order": 1e-12,
        "rank_tol": 1e-10,
    },

    # ─── SIZE LIMITS ──────────────────────────────────────────
    "limits": {
        "max_tensor_entries": 2 ** 31,
        "entry_budget": int(os.getenv("TUCKER_ENTRY_BUDGET", "16000000")),
    },

    # ─── SYNTHETIC GENERATOR DEFAULTS ─────────────────────────
    "synth": {
        "beta": 0.8,
        "kappa": 1.0,
    },

    # ─── HOOI REFINEMENT ──────────────────────────────────────
    "hooi": {
        "max_iters": 25,
        "tol": 1e-8,
    },

    # ─── EXPERIMENT HARNESS ───────────────────────────────────
    "bench": {
        "seed": int(os.getenv("TUCKER_SEED", "20240601")),
        "replicates": int(os.getenv("TUCKER_REPLICATES", "50")),
        "parallel": int(os.getenv("TUCKER_PARALLEL", "1")),
        "float_digits": 6,
    },

    # ─── TABLE 2 COMPARISON POLICY ────────────────────────────
    "tolerance_policy": {
        "se_multiplier": 5.0,
        "abs_floor": 0.002,
        "rel_fraction": 0.05,
    },

    "log_level": os.getenv("LOG_LEVEL", "INFO").upper(),
}


def validate_config():
    """Validate value ranges; raises ConfigError listing every problem found."""
    problems = []

    for name, value in config["tolerances"].items():
        if not value >= 0:
            problems.append(f"tolerances.{name} must be >= 0 (got {value})")

    limits = config["limits"]
    if limits["entry_budget"] < 1:
        problems.append(f"TUCKER_ENTRY_BUDGET must be >= 1 (got {limits['entry_budget']})")
    if limits["entry_budget"] > limits["max_tensor_entries"]:
        problems.append("TUCKER_ENTRY_BUDGET exceeds the 2^31 tensor entry cap")

    bench = config["bench"]
    if bench["replicates"] < 1:
        problems.append(f"TUCKER_REPLICATES must be >= 1 (got {bench['replicates']})")
    if bench["parallel"] < 1:
        problems.append(f"TUCKER_PARALLEL must be >= 1 (got {bench['parallel']})")
    if bench["seed"] < 0:
        problems.append(f"TUCKER_SEED must be >= 0 (got {bench['seed']})")

    if not 0 < config["synth"]["beta"] < 1:
        problems.append("synth.beta must lie in (0, 1)")

    policy = config["tolerance_policy"]
    if min(policy.values()) < 0:
        problems.append("tolerance_policy entries must be >= 0")

    if config["log_level"] not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        problems.append(f"LOG_LEVEL not recognised: {config['log_level']}")

    if problems:
        raise ConfigError("Invalid configuration: " + "; ".join(problems))
