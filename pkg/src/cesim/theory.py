"""Numeric estimation of smoothness / PL constants and the advisory checks.

The certified step-size cap and the residual error ball come with large
worst-case constants; the advisory reports them, checks the configured step
against them, and separately suggests a practical smoothness-based step
size for experiments. All checks are advisory: a run proceeds either way
with the verdict recorded in its trace header.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .agents import AgentRoster
from .errors import ConfigurationError, EstimationError, UnsupportedObjectiveError
from .objectives import ObjectiveKind, ProblemInstance, eval_objective, grad_objective
from .streams import RandomStream

L_SAFETY = 1.5
MU_SAFETY = 0.75
_GAP_FLOOR = 1e-12


def _ball_point(gen: np.random.Generator, center: np.ndarray, radius: float) -> np.ndarray:
    d = center.size
    v = gen.standard_normal(d)
    v /= np.linalg.norm(v)
    return center + radius * gen.random() ** (1.0 / d) * v


def lipschitz_estimate(
    grad_fn: Callable[[np.ndarray], np.ndarray],
    center: np.ndarray,
    radius: float,
    samples: int,
    gen: np.random.Generator,
) -> float:
    """Max sampled gradient-difference ratio, inflated by a safety factor."""
    if samples < 2:
        raise ConfigurationError("need at least 2 samples to estimate smoothness")
    best = 0.0
    for _ in range(samples):
        x = _ball_point(gen, center, radius)
        y = _ball_point(gen, center, radius)
        dxy = float(np.linalg.norm(x - y))
        if dxy < 1e-9:
            continue
        ratio = float(np.linalg.norm(grad_fn(x) - grad_fn(y))) / dxy
        best = max(best, ratio)
    if best == 0.0:
        raise EstimationError("all sampled gradient pairs were degenerate")
    return L_SAFETY * best


def pl_estimate(
    fn: Callable[[np.ndarray], float],
    grad_fn: Callable[[np.ndarray], np.ndarray],
    f_star: float,
    center: np.ndarray,
    radius: float,
    samples: int,
    gen: np.random.Generator,
) -> float:
    """Min sampled ||grad||^2 / (2 gap) ratio, deflated by a safety factor."""
    if samples < 2:
        raise ConfigurationError("need at least 2 samples to estimate the PL constant")
    best = math.inf
    for _ in range(samples):
        x = _ball_point(gen, center, radius)
        gap = fn(x) - f_star
        if gap < _GAP_FLOOR:
            continue
        g = grad_fn(x)
        best = min(best, float(np.dot(g, g)) / (2.0 * gap))
    if not math.isfinite(best):
        raise EstimationError("all samples fell inside the optimality-gap floor")
    return MU_SAFETY * best


def _honest_grad(inst: ProblemInstance, roster: AgentRoster):
    honest = roster.honest_ids

    def grad(x: np.ndarray) -> np.ndarray:
        total = np.zeros(inst.d)
        for i in honest:
            total += grad_objective(inst, i, x)
        return total / len(honest)

    return grad


def estimate_L(
    inst: ProblemInstance,
    roster: AgentRoster,
    region_radius: float,
    samples: int,
    stream: RandomStream,
) -> float:
    gen = stream.child("theory-smoothness")
    return lipschitz_estimate(
        _honest_grad(inst, roster), inst.planted_optimum, region_radius, samples, gen
    )


def estimate_mu(
    inst: ProblemInstance,
    roster: AgentRoster,
    region_radius: float,
    samples: int,
    stream: RandomStream,
) -> float:
    if inst.kind is not ObjectiveKind.REGRESSION_SIN:
        raise UnsupportedObjectiveError("PL constant estimation needs the regression objective")
    honest = roster.honest_ids

    def fn(x: np.ndarray) -> float:
        return sum(eval_objective(inst, i, x) for i in honest) / len(honest)

    f_star = fn(inst.planted_optimum)
    gen = stream.child("theory-pl")
    return pl_estimate(
        fn, _honest_grad(inst, roster), f_star, inst.planted_optimum, region_radius, samples, gen
    )


@dataclass
class TheoryConstants:
    L_hat: float
    mu_hat: Optional[float]
    sigma: float
    samples: int = 0
    region_radius: float = 0.0


def estimate_constants(
    inst: ProblemInstance,
    roster: AgentRoster,
    sigma: float,
    region_radius: float = 1.0,
    samples: int = 64,
    stream: Optional[RandomStream] = None,
) -> TheoryConstants:
    stream = stream or RandomStream(0)
    L_hat = estimate_L(inst, roster, region_radius, samples, stream)
    mu_hat = None
    if inst.kind is ObjectiveKind.REGRESSION_SIN:
        mu_hat = estimate_mu(inst, roster, region_radius, samples, stream)
    return TheoryConstants(
        L_hat=L_hat, mu_hat=mu_hat, sigma=sigma, samples=samples, region_radius=region_radius
    )


def suggest_alpha(L_hat: float, local_steps: int) -> float:
    """Practical smoothness-based step size for experiments."""
    return 1.0 / (2.0 * L_hat * local_steps)


@dataclass
class ConditionReport:
    L_hat: float
    mu_hat: Optional[float]
    alpha: float
    alpha_cap_rate: Optional[float]  # mu / (72 L^2 T)
    alpha_cap_proof: Optional[float]  # mu^2 / (72 L^3 T)
    alpha_cap: Optional[float]  # min of the two
    step_ok: Optional[bool]
    fraction_filter: float  # f / (N - f)
    fraction_honest: float  # f / |H|, worst case |H| = N - f
    fraction_bound: Optional[float]  # mu / (3 L)
    fraction_ok: Optional[bool]
    alpha_suggested: float

    def to_dict(self) -> dict:
        return asdict(self)


def check_conditions(
    consts: TheoryConstants,
    n: int,
    filter_f: int,
    local_steps: int,
    alpha: float,
) -> ConditionReport:
    L, mu = consts.L_hat, consts.mu_hat
    fraction = filter_f / (n - filter_f)
    if mu is None:
        return ConditionReport(
            L_hat=L,
            mu_hat=None,
            alpha=alpha,
            alpha_cap_rate=None,
            alpha_cap_proof=None,
            alpha_cap=None,
            step_ok=None,
            fraction_filter=fraction,
            fraction_honest=fraction,
            fraction_bound=None,
            fraction_ok=None,
            alpha_suggested=suggest_alpha(L, local_steps),
        )
    cap_rate = mu / (72.0 * L**2 * local_steps)
    cap_proof = mu**2 / (72.0 * L**3 * local_steps)
    cap = min(cap_rate, cap_proof)
    bound = mu / (3.0 * L)
    return ConditionReport(
        L_hat=L,
        mu_hat=mu,
        alpha=alpha,
        alpha_cap_rate=cap_rate,
        alpha_cap_proof=cap_proof,
        alpha_cap=cap,
        step_ok=alpha <= cap,
        fraction_filter=fraction,
        fraction_honest=fraction,
        fraction_bound=bound,
        fraction_ok=fraction <= bound,
        alpha_suggested=suggest_alpha(L, local_steps),
    )


def error_ball(
    consts: TheoryConstants,
    local_steps: int,
    alpha: float,
    minibatch_m: int,
    filter_f: int,
    honest_count: int,
) -> float:
    """Residual optimality-gap bound under a constant step size."""
    if consts.mu_hat is None:
        raise UnsupportedObjectiveError("error ball needs a PL constant")
    sigma_sq = consts.sigma**2 / minibatch_m
    first = 180.0 * consts.L_hat * local_steps * alpha * sigma_sq / consts.mu_hat
    second = 72.0 * local_steps * sigma_sq * filter_f / (consts.mu_hat * honest_count)
    return first + second
