"""Deterministic simulator of Byzantine fault-tolerant federated local SGD
with the comparative-elimination filter."""

from .aggregation import (
    CE,
    CWTM,
    AggregationOutcome,
    Mean,
    MultiKrum,
    aggregate,
    ce_filter,
    cwtm,
    mean_rule,
    multi_krum,
)
from .agents import (
    AgentRoster,
    FixedPoint,
    GaussianBlast,
    InlierCollusion,
    LocalRunConfig,
    SignFlip,
    byzantine_message,
    honest_local_sgd,
)
from .engine import (
    ConstantStep,
    ExperimentConfig,
    HarmonicStep,
    RoundOutcome,
    Trace,
    mean_sq_grad_honest,
    q_honest,
    run_experiment,
    run_round,
)
from .errors import (
    ConfigurationError,
    DivergenceError,
    EstimationError,
    GenerationError,
    UnsupportedObjectiveError,
)
from .objectives import (
    NoiseModel,
    ObjectiveKind,
    ProblemInstance,
    eval_objective,
    generate_instance,
    grad_objective,
    stochastic_gradient,
)
from .streams import RandomStream, gaussian_vector
from .theory import (
    ConditionReport,
    TheoryConstants,
    check_conditions,
    error_ball,
    estimate_L,
    estimate_constants,
    estimate_mu,
    suggest_alpha,
)

__version__ = "0.1.0"
