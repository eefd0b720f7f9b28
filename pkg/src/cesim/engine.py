"""Round loop: broadcast, local phase, Byzantine phase, aggregation, metrics.

Metrics for round k are evaluated at the broadcast model x_bar_k, matching
per-round convergence plots; the final model gets one terminal metric row.
Honest agents within a round may be evaluated by a thread pool (size taken
from the CESIM_WORKERS environment variable); results are collected by
agent id, so traces are identical for any worker count.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np

from .aggregation import AggregationRule, aggregate
from .agents import AgentRoster, LocalRunConfig, byzantine_message, honest_local_sgd
from .errors import ConfigurationError, DivergenceError
from .objectives import NoiseModel, ProblemInstance, eval_objective, grad_objective
from .streams import RandomStream


@dataclass(frozen=True)
class ConstantStep:
    alpha: float

    def at(self, k: int) -> float:
        return self.alpha


@dataclass(frozen=True)
class HarmonicStep:
    """alpha_k = c / (k + 1), the O(1/k) diminishing schedule."""

    c: float

    def at(self, k: int) -> float:
        return self.c / (k + 1)


StepSchedule = Union[ConstantStep, HarmonicStep]


@dataclass
class RoundOutcome:
    k: int
    optimality_gap: float
    mean_sq_grad: float
    eliminated_ids: List[int]
    byzantine_kept: int


@dataclass
class ExperimentConfig:
    instance: ProblemInstance
    roster: AgentRoster
    rule: AggregationRule
    rounds: int
    local_steps: int
    schedule: StepSchedule
    noise: NoiseModel
    root_seed: int
    initial_model: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.rounds < 1:
            raise ConfigurationError("need at least one round")
        if self.local_steps < 1:
            raise ConfigurationError("need at least one local step")
        if self.roster.n != self.instance.n_agents:
            raise ConfigurationError("roster size does not match instance agent count")

    def start_model(self) -> np.ndarray:
        if self.initial_model is None:
            return np.zeros(self.instance.d)
        return np.array(self.initial_model, dtype=np.float64)


@dataclass
class Trace:
    config_snapshot: dict
    rounds: List[RoundOutcome]
    final_model: np.ndarray
    abort_reason: Optional[str] = None
    round_seconds: List[float] = field(default_factory=list)

    @property
    def completed(self) -> bool:
        return self.abort_reason is None


def q_honest(inst: ProblemInstance, roster: AgentRoster, x: np.ndarray) -> float:
    honest = roster.honest_ids
    return sum(eval_objective(inst, i, x) for i in honest) / len(honest)


def mean_sq_grad_honest(inst: ProblemInstance, roster: AgentRoster, x: np.ndarray) -> float:
    honest = roster.honest_ids
    return sum(float(np.dot(g, g)) for g in (grad_objective(inst, i, x) for i in honest)) / len(honest)


def _workers() -> int:
    return max(1, int(os.environ.get("CESIM_WORKERS", "1")))


def run_round(
    x_bar: np.ndarray,
    cfg: ExperimentConfig,
    k: int,
    stream: RandomStream,
    q_star: float,
):
    """Execute one global round; returns (x_bar_next, RoundOutcome)."""
    roster = cfg.roster
    local = LocalRunConfig(steps=cfg.local_steps, alpha=cfg.schedule.at(k), round_k=k)

    gap = q_honest(cfg.instance, roster, x_bar) - q_star
    msg = mean_sq_grad_honest(cfg.instance, roster, x_bar)

    honest = roster.honest_ids

    def run_one(agent: int) -> np.ndarray:
        return honest_local_sgd(cfg.instance, agent, x_bar, local, cfg.noise, stream)

    workers = _workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            honest_vecs = list(pool.map(run_one, honest))
    else:
        honest_vecs = [run_one(i) for i in honest]

    reports = list(zip(honest, honest_vecs))
    for agent in sorted(roster.byzantine_ids):
        gen = stream.child("byzantine", agent, k, 0, 0)
        reports.append(
            (agent, byzantine_message(roster.attack, x_bar, honest_vecs, roster.filter_f, gen))
        )
    reports.sort(key=lambda item: item[0])

    outcome = aggregate(cfg.rule, x_bar, reports)
    if not np.all(np.isfinite(outcome.next_model)):
        raise DivergenceError(-1, k)

    kept = set(outcome.kept_ids)
    result = RoundOutcome(
        k=k,
        optimality_gap=gap,
        mean_sq_grad=msg,
        eliminated_ids=list(outcome.eliminated_ids),
        byzantine_kept=len(kept & roster.byzantine_ids),
    )
    return outcome.next_model, result


def run_experiment(cfg: ExperimentConfig, config_snapshot: Optional[dict] = None) -> Trace:
    stream = RandomStream(cfg.root_seed)
    q_star = q_honest(cfg.instance, cfg.roster, cfg.instance.planted_optimum)
    x = cfg.start_model()
    rounds: List[RoundOutcome] = []
    seconds: List[float] = []
    abort = None
    for k in range(cfg.rounds):
        t0 = time.perf_counter()
        try:
            x, outcome = run_round(x, cfg, k, stream, q_star)
        except DivergenceError as exc:
            abort = str(exc)
            break
        seconds.append(time.perf_counter() - t0)
        rounds.append(outcome)
    if abort is None:
        # terminal metric row for the final broadcast model
        rounds.append(
            RoundOutcome(
                k=cfg.rounds,
                optimality_gap=q_honest(cfg.instance, cfg.roster, x) - q_star,
                mean_sq_grad=mean_sq_grad_honest(cfg.instance, cfg.roster, x),
                eliminated_ids=[],
                byzantine_kept=0,
            )
        )
    return Trace(
        config_snapshot=config_snapshot or {},
        rounds=rounds,
        final_model=x,
        abort_reason=abort,
        round_seconds=seconds,
    )
