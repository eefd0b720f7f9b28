"""Per-trace summary statistics: fitted linear rate, plateau, survivors."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import List, Sequence

import numpy as np

from .errors import ConfigurationError


@dataclass
class SummaryStats:
    rho: float
    r_squared: float
    plateau: float
    mean_byzantine_kept: float
    exact: bool = False  # set when the metric hit zero and no rate could be fitted

    def to_dict(self) -> dict:
        return asdict(self)


def summarize_series(
    metric: Sequence[float], byzantine_kept: Sequence[int]
) -> SummaryStats:
    """Fit metric(k) ~ C * rho^k on the tail of the trace.

    `metric` holds one value per round plus the terminal row (indices
    0..K). The fit window is [ceil(K/10), K]; the plateau is the mean over
    the final 20 percent of rows.
    """
    rows = len(metric)
    if rows - 1 < 10:
        raise ConfigurationError("summary needs a trace with at least 10 rounds")
    big_k = rows - 1
    tail = max(1, math.ceil(0.2 * rows))
    plateau = float(np.mean(metric[-tail:]))
    kept = float(np.mean(byzantine_kept[:-1])) if len(byzantine_kept) > 1 else 0.0

    start = math.ceil(big_k / 10)
    ks, logs = [], []
    for k in range(start, big_k + 1):
        if metric[k] > 0.0:
            ks.append(k)
            logs.append(math.log(metric[k]))
    if len(ks) < 2:
        return SummaryStats(rho=0.0, r_squared=0.0, plateau=plateau, mean_byzantine_kept=kept, exact=True)

    ks_arr = np.asarray(ks, dtype=float)
    logs_arr = np.asarray(logs)
    slope, intercept = np.polyfit(ks_arr, logs_arr, 1)
    pred = slope * ks_arr + intercept
    ss_res = float(np.sum((logs_arr - pred) ** 2))
    ss_tot = float(np.sum((logs_arr - logs_arr.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return SummaryStats(
        rho=float(math.exp(slope)),
        r_squared=r_squared,
        plateau=plateau,
        mean_byzantine_kept=kept,
    )


def summarize_rows(rows: List[dict], metric: str = "optimality_gap") -> SummaryStats:
    return summarize_series(
        [row[metric] for row in rows], [row["byzantine_kept"] for row in rows]
    )


def summarize_trace(trace, metric: str = "optimality_gap") -> SummaryStats:
    values = [getattr(r, metric) for r in trace.rounds]
    kept = [r.byzantine_kept for r in trace.rounds]
    return summarize_series(values, kept)
