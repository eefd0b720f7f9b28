"""Synthetic per-agent cost functions and their gradient oracles.

Two objective families, both built from the residual norm r = ||A x - b||:

  * regression_sin:  r^2 + sin^2(r)   (nonconvex, PL holds)
  * sigmoid_norm:    1 / (1 + exp(-r))  (nonconvex, PL fails)

Instances plant a single shared minimizer by setting b = A x_star for every
agent, so every subset of agents is minimized at the same point. Stochastic
gradients add isotropic Gaussian noise scaled so that the expected squared
noise norm equals sigma^2 / m.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Tuple

import numpy as np

from .errors import ConfigurationError, GenerationError
from .streams import RandomStream, gaussian_vector

R_EPS = 1e-12
_RANK_TOL = 1e-8
_MAX_RETRIES = 10


class ObjectiveKind(str, Enum):
    REGRESSION_SIN = "regression_sin"
    SIGMOID_NORM = "sigmoid_norm"


@dataclass(frozen=True)
class NoiseModel:
    """Gradient noise level sigma and simulated mini-batch size m."""

    sigma: float = 0.0
    minibatch_m: int = 1

    def __post_init__(self):
        if self.sigma < 0:
            raise ConfigurationError("noise sigma must be >= 0")
        if self.minibatch_m < 1:
            raise ConfigurationError("minibatch size must be >= 1")

    def per_coordinate_std(self, d: int) -> float:
        # E||noise||^2 = d * std^2 = sigma^2 / m
        return self.sigma / math.sqrt(d * self.minibatch_m)


@dataclass
class ProblemInstance:
    kind: ObjectiveKind
    agents: List[Tuple[np.ndarray, np.ndarray]]  # (A: l x d, b: l)
    planted_optimum: np.ndarray
    d: int
    l: int

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "d": self.d,
            "l": self.l,
            "N": self.n_agents,
            "planted_optimum": self.planted_optimum.tolist(),
            "agents": [
                {"A": A.flatten().tolist(), "b": b.tolist()} for A, b in self.agents
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ProblemInstance":
        d, l = int(doc["d"]), int(doc["l"])
        agents = [
            (
                np.asarray(a["A"], dtype=np.float64).reshape(l, d),
                np.asarray(a["b"], dtype=np.float64),
            )
            for a in doc["agents"]
        ]
        if len(agents) != int(doc["N"]):
            raise ConfigurationError("instance agent count does not match N")
        return cls(
            kind=ObjectiveKind(doc["kind"]),
            agents=agents,
            planted_optimum=np.asarray(doc["planted_optimum"], dtype=np.float64),
            d=d,
            l=l,
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "ProblemInstance":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _residual(inst: ProblemInstance, agent: int, x: np.ndarray):
    A, b = inst.agents[agent]
    res = A @ x - b
    return A, res, float(np.linalg.norm(res))


def eval_objective(inst: ProblemInstance, agent: int, x: np.ndarray) -> float:
    _, _, r = _residual(inst, agent, x)
    if not math.isfinite(r):
        return math.inf
    if inst.kind is ObjectiveKind.REGRESSION_SIN:
        return r * r + math.sin(r) ** 2
    return 1.0 / (1.0 + math.exp(-r))


def grad_objective(inst: ProblemInstance, agent: int, x: np.ndarray) -> np.ndarray:
    A, res, r = _residual(inst, agent, x)
    if r < R_EPS:
        # regression_sin: g = A^T res vanishes with r; sigmoid_norm: symmetric limit
        return np.zeros(inst.d)
    g = A.T @ res
    if inst.kind is ObjectiveKind.REGRESSION_SIN:
        if not math.isfinite(2.0 * r):
            # residual overflow: surface divergence through the finiteness checks
            return np.full(inst.d, np.nan)
        return (2.0 + math.sin(2.0 * r) / r) * g
    s = 1.0 / (1.0 + math.exp(-r))
    return (s * (1.0 - s) / r) * g


def stochastic_gradient(
    inst: ProblemInstance,
    agent: int,
    x: np.ndarray,
    noise: NoiseModel,
    gen: np.random.Generator,
) -> np.ndarray:
    grad = grad_objective(inst, agent, x)
    if noise.sigma == 0.0:
        return grad
    return grad + gaussian_vector(gen, inst.d, noise.per_coordinate_std(inst.d))


def generate_instance(
    kind: ObjectiveKind,
    n_agents: int,
    d: int,
    l: int,
    data_scale: float,
    stream: RandomStream,
    planted: bool = True,
) -> ProblemInstance:
    """Draw per-agent data with a shared planted minimizer.

    Every A gets i.i.d. normal(0, data_scale^2) entries and is regenerated
    (up to 10 times) if its smallest singular value falls below 1e-8, so
    A^T A is always full rank.
    """
    if l < d:
        raise ConfigurationError(f"need l >= d for full column rank (got l={l}, d={d})")
    if n_agents < 1:
        raise ConfigurationError("need at least one agent")
    x_star = stream.child("instance-optimum").standard_normal(d)
    agents = []
    for i in range(n_agents):
        for attempt in range(_MAX_RETRIES):
            gen = stream.child("instance-agent", i, attempt)
            A = gen.standard_normal((l, d)) * data_scale
            if np.linalg.svd(A, compute_uv=False)[-1] > _RANK_TOL:
                break
        else:
            raise GenerationError(f"agent {i}: rank check failed after {_MAX_RETRIES} retries")
        if planted:
            b = A @ x_star
        else:
            b = gen.standard_normal(l) * data_scale
        agents.append((A, b))
    return ProblemInstance(kind=kind, agents=agents, planted_optimum=x_star, d=d, l=l)
