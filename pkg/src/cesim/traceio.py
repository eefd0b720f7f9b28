"""Trace serialization: delimited text for plots, JSON for full replay."""

from __future__ import annotations

import csv
import json
from typing import List, Optional

from .engine import Trace

CSV_FIELDS = ["round", "optimality_gap", "mean_sq_grad", "eliminated_ids", "byzantine_kept"]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def trace_to_csv(trace: Trace) -> str:
    lines = [",".join(CSV_FIELDS)]
    for row in trace.rounds:
        lines.append(
            ",".join(
                [
                    str(row.k),
                    _fmt(row.optimality_gap),
                    _fmt(row.mean_sq_grad),
                    ";".join(str(i) for i in row.eliminated_ids),
                    str(row.byzantine_kept),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_trace_csv(trace: Trace, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(trace_to_csv(trace))


def read_trace_csv(path) -> List[dict]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                {
                    "round": int(rec["round"]),
                    "optimality_gap": float(rec["optimality_gap"]),
                    "mean_sq_grad": float(rec["mean_sq_grad"]),
                    "eliminated_ids": [int(i) for i in rec["eliminated_ids"].split(";") if i],
                    "byzantine_kept": int(rec["byzantine_kept"]),
                }
            )
    return rows


def trace_to_json_doc(trace: Trace, condition_report: Optional[dict] = None) -> dict:
    return {
        "config": trace.config_snapshot,
        "condition_report": condition_report,
        "abort_reason": trace.abort_reason,
        "final_model": trace.final_model.tolist(),
        "rounds": [
            {
                "round": r.k,
                "optimality_gap": r.optimality_gap,
                "mean_sq_grad": r.mean_sq_grad,
                "eliminated_ids": r.eliminated_ids,
                "byzantine_kept": r.byzantine_kept,
            }
            for r in trace.rounds
        ],
    }


def write_trace_json(trace: Trace, path, condition_report: Optional[dict] = None) -> None:
    with open(path, "w") as fh:
        json.dump(trace_to_json_doc(trace, condition_report), fh, indent=2, sort_keys=True)
