"""Coordinator-side aggregation rules.

Comparative elimination (CE) drops the f reports farthest from the current
global model and averages the rest. Multi-KRUM and the coordinate-wise
trimmed mean are included as baselines, plus the plain mean. Ties in any
distance or score sort are broken by ascending agent id so runs replay
deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from .errors import ConfigurationError

Report = Tuple[int, np.ndarray]


@dataclass(frozen=True)
class CE:
    f: int
    name = "ce"


@dataclass(frozen=True)
class MultiKrum:
    f: int
    m_select: int
    name = "multi_krum"


@dataclass(frozen=True)
class CWTM:
    f: int
    name = "cwtm"


@dataclass(frozen=True)
class Mean:
    name = "mean"


AggregationRule = Union[CE, MultiKrum, CWTM, Mean]


@dataclass
class AggregationOutcome:
    next_model: np.ndarray
    kept_ids: List[int]
    eliminated_ids: List[int]


def _split(reports: List[Report]):
    ids = [int(i) for i, _ in reports]
    vecs = np.stack([v for _, v in reports])
    return ids, vecs


def ce_filter(x_bar: np.ndarray, reports: List[Report], f: int) -> AggregationOutcome:
    n = len(reports)
    if n <= f:
        raise ConfigurationError(f"CE needs more reports than f (got N={n}, f={f})")
    ids, vecs = _split(reports)
    dists = np.linalg.norm(vecs - x_bar, axis=1)
    order = sorted(range(n), key=lambda j: (dists[j], ids[j]))
    kept, dropped = order[: n - f], order[n - f :]
    return AggregationOutcome(
        next_model=vecs[kept].mean(axis=0),
        kept_ids=sorted(ids[j] for j in kept),
        eliminated_ids=sorted(ids[j] for j in dropped),
    )


def multi_krum(reports: List[Report], f: int, m_select: int) -> AggregationOutcome:
    n = len(reports)
    if n < 2 * f + 3:
        raise ConfigurationError(f"multi-KRUM needs N >= 2f+3 (got N={n}, f={f})")
    if not 1 <= m_select <= n - f:
        raise ConfigurationError(f"m_select must be in [1, N-f] (got {m_select})")
    ids, vecs = _split(reports)
    sq = np.sum((vecs[:, None, :] - vecs[None, :, :]) ** 2, axis=2)
    scores = np.empty(n)
    for j in range(n):
        others = np.delete(sq[j], j)
        others.sort()
        scores[j] = others[: n - f - 2].sum()
    order = sorted(range(n), key=lambda j: (scores[j], ids[j]))
    kept, dropped = order[:m_select], order[m_select:]
    return AggregationOutcome(
        next_model=vecs[kept].mean(axis=0),
        kept_ids=sorted(ids[j] for j in kept),
        eliminated_ids=sorted(ids[j] for j in dropped),
    )


def cwtm(reports: List[Report], f: int) -> AggregationOutcome:
    n = len(reports)
    if n <= 2 * f:
        raise ConfigurationError(f"CWTM needs N > 2f (got N={n}, f={f})")
    ids, vecs = _split(reports)
    ordered = np.sort(vecs, axis=0)
    trimmed = ordered[f : n - f].mean(axis=0)
    # trimming is per coordinate, so there is no meaningful eliminated set
    return AggregationOutcome(next_model=trimmed, kept_ids=sorted(ids), eliminated_ids=[])


def mean_rule(reports: List[Report]) -> AggregationOutcome:
    ids, vecs = _split(reports)
    return AggregationOutcome(next_model=vecs.mean(axis=0), kept_ids=sorted(ids), eliminated_ids=[])


def aggregate(rule: AggregationRule, x_bar: np.ndarray, reports: List[Report]) -> AggregationOutcome:
    if isinstance(rule, CE):
        return ce_filter(x_bar, reports, rule.f)
    if isinstance(rule, MultiKrum):
        return multi_krum(reports, rule.f, rule.m_select)
    if isinstance(rule, CWTM):
        return cwtm(reports, rule.f)
    if isinstance(rule, Mean):
        return mean_rule(reports)
    raise ConfigurationError(f"unknown aggregation rule {rule!r}")
