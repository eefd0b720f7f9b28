"""Honest local SGD and the Byzantine message fabrications.

Honest agents start each round from the broadcast model and take T noisy
gradient steps. The iterate is always recomputed as
x_bar - alpha * (running gradient sum), which makes the step-by-step
recursion and the summed-gradient closed form identical bit for bit.

Byzantine agents skip local SGD entirely and fabricate their report, with
full knowledge of the honest reports of the round.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import FrozenSet, List, Union

import numpy as np

from .errors import ConfigurationError, DivergenceError
from .objectives import NoiseModel, ProblemInstance, stochastic_gradient
from .streams import RandomStream


@dataclass(frozen=True)
class SignFlip:
    """Report the honest mean displacement reflected through x_bar."""

    scale: float = 1.0
    name = "sign_flip"


@dataclass(frozen=True)
class GaussianBlast:
    """Report x_bar plus a random direction of fixed (usually huge) norm."""

    magnitude: float = 1e3
    name = "gaussian_blast"


@dataclass(frozen=True)
class FixedPoint:
    """Always report the same target vector."""

    target: np.ndarray = field(default_factory=lambda: np.zeros(1))
    name = "fixed_point"


@dataclass(frozen=True)
class InlierCollusion:
    """Bias the aggregate from just inside the elimination radius.

    The report sits at scale * rho from x_bar in the direction opposite the
    honest mean displacement, where rho is the f-th largest honest distance.
    With scale < 1 a distance-sorting filter never eliminates it.
    """

    scale: float = 0.9
    name = "inlier_collusion"


AttackStrategy = Union[SignFlip, GaussianBlast, FixedPoint, InlierCollusion]


@dataclass(frozen=True)
class AgentRoster:
    n: int
    byzantine_ids: FrozenSet[int]
    filter_f: int
    attack: AttackStrategy

    def __post_init__(self):
        if not all(0 <= i < self.n for i in self.byzantine_ids):
            raise ConfigurationError("byzantine ids out of range")
        if len(self.byzantine_ids) > self.filter_f:
            raise ConfigurationError(
                f"|byzantine_ids|={len(self.byzantine_ids)} exceeds filter tolerance f={self.filter_f}"
            )
        if self.filter_f > self.n / 2 - 1:
            raise ConfigurationError(
                f"filter tolerance f={self.filter_f} violates f <= N/2 - 1 with N={self.n}"
            )

    @property
    def honest_ids(self) -> List[int]:
        return [i for i in range(self.n) if i not in self.byzantine_ids]


@dataclass(frozen=True)
class LocalRunConfig:
    steps: int
    alpha: float
    round_k: int

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigurationError("local step count T must be >= 1")
        if self.alpha < 0:
            raise ConfigurationError("step size must be >= 0")


def honest_local_sgd(
    inst: ProblemInstance,
    agent: int,
    x_bar: np.ndarray,
    cfg: LocalRunConfig,
    noise: NoiseModel,
    stream: RandomStream,
) -> np.ndarray:
    grad_sum = np.zeros(inst.d)
    x = x_bar
    for t in range(cfg.steps):
        gen = stream.child("local-sgd", agent, cfg.round_k, t, 0)
        grad_sum = grad_sum + stochastic_gradient(inst, agent, x, noise, gen)
        x = x_bar - cfg.alpha * grad_sum
        if not np.all(np.isfinite(x)):
            raise DivergenceError(agent, cfg.round_k)
    return x


def byzantine_message(
    strategy: AttackStrategy,
    x_bar: np.ndarray,
    honest_reports: List[np.ndarray],
    filter_f: int,
    gen: np.random.Generator,
) -> np.ndarray:
    if isinstance(strategy, FixedPoint):
        return np.array(strategy.target, dtype=np.float64)
    if isinstance(strategy, GaussianBlast):
        v = gen.standard_normal(x_bar.size)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return x_bar.copy()
        return x_bar + strategy.magnitude * v / nv
    mean_disp = np.mean(honest_reports, axis=0) - x_bar
    if isinstance(strategy, SignFlip):
        return x_bar - strategy.scale * mean_disp
    if isinstance(strategy, InlierCollusion):
        dists = sorted((float(np.linalg.norm(v - x_bar)) for v in honest_reports), reverse=True)
        rho = dists[min(filter_f, len(dists)) - 1] if filter_f >= 1 else 0.0
        norm_disp = np.linalg.norm(mean_disp)
        if rho == 0.0 or norm_disp == 0.0:
            return x_bar.copy()
        u = -mean_disp / norm_disp
        return x_bar + strategy.scale * rho * u
    raise ConfigurationError(f"unknown attack strategy {strategy!r}")
