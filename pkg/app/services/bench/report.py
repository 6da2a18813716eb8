"""
Result Writers

CSV (default) and JSON output for summary rows, Table 2 comparisons
and rank sweeps. The CSV header is always written and every float is
printed with a fixed number of significant digits, so two runs with
the same seed produce identical files once timing is switched off.

An output path ending in ".json" selects JSON; no path writes CSV to
stdout.
"""

import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from app.config import config
from app.services.bench.runner import SummaryRow, SweepRow
from app.services.bench.table2 import Table2Result

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "kind", "lambda", "dim1", "dim2", "rank", "replicates",
    "mean_relerr", "se_relerr", "seed", "wall_time_s",
]
BOUND_COLUMNS = ["variance_term", "bias_lower", "bias_upper", "snr_margin"]
COMPARISON_COLUMNS = ["paper_mean", "paper_se", "abs_diff", "tolerance", "pass"]
SWEEP_COLUMNS = ["rank", "mean_relerr", "se_relerr", "variance_term", "bias_lower", "bias_upper"]

Out = Optional[Union[str, Path]]


def fmt(value: float, digits: int = None) -> str:
    digits = config["bench"]["float_digits"] if digits is None else digits
    return f"{float(value):.{digits}g}"


def _summary_record(row: SummaryRow, timing: bool) -> list:
    spec = row.spec
    return [
        spec.kind, fmt(spec.lam), spec.dims[0], spec.dims[1], row.rank, row.n_replicates,
        fmt(row.mean_relerr), fmt(row.se_relerr), spec.seed,
        fmt(row.wall_time_seconds if timing else 0.0),
    ]


def _bound_record(row: SummaryRow) -> list:
    b = row.bounds
    if b is None:
        return [""] * len(BOUND_COLUMNS)
    return [fmt(b.variance_term), fmt(b.bias.lower), fmt(b.bias.upper), fmt(b.snr_margin)]


def _json_row(row: SummaryRow, timing: bool) -> dict:
    data = row.to_dict()
    if not timing:
        data["wall_time_seconds"] = 0.0
    return data


def render_csv(header: Sequence[str], records: Iterable[Sequence[object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(records)
    return buffer.getvalue()


def _emit(out: Out, header: Sequence[str], records: List[list], payload: object):
    if out is not None and str(out).endswith(".json"):
        text = json.dumps(payload, indent=2, default=float) + "\n"
    else:
        text = render_csv(header, records)
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text)
    logger.info("💾 [Bench] Wrote %d record(s) to %s", len(records), out)


def write_summary(rows: Sequence[SummaryRow], out: Out = None, bounds: bool = False, timing: bool = True):
    header = CSV_COLUMNS + (BOUND_COLUMNS if bounds else [])
    records = [
        _summary_record(row, timing) + (_bound_record(row) if bounds else [])
        for row in rows
    ]
    _emit(out, header, records, [_json_row(row, timing) for row in rows])


def write_comparison(result: Table2Result, out: Out = None, bounds: bool = False, timing: bool = True):
    header = CSV_COLUMNS + (BOUND_COLUMNS if bounds else []) + COMPARISON_COLUMNS
    records = []
    payload = []
    for item in result.rows:
        records.append(
            _summary_record(item.row, timing)
            + (_bound_record(item.row) if bounds else [])
            + [fmt(item.paper_mean), fmt(item.paper_se), fmt(item.abs_diff), fmt(item.tolerance),
               "true" if item.passed else "false"]
        )
        entry = item.to_dict()
        if not timing:
            entry["wall_time_seconds"] = 0.0
        payload.append(entry)
    _emit(out, header, records, {
        "pass_fraction": result.pass_fraction,
        "one_sided": result.one_sided,
        "cells": payload,
    })


def write_sweep(sweep: Sequence[SweepRow], out: Out = None):
    records = [
        [item.rank, fmt(item.mean_relerr), fmt(item.se_relerr), fmt(item.variance_term),
         fmt(item.bias.lower), fmt(item.bias.upper)]
        for item in sweep
    ]
    _emit(out, SWEEP_COLUMNS, records, [item.to_dict() for item in sweep])


def write_json(payload: object, out: Out = None):
    text = json.dumps(payload, indent=2, default=float) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
        logger.info("💾 [Bench] Wrote %s", out)
