"""Exception types shared across the simulator."""


class ConfigurationError(ValueError):
    """Invalid configuration: bad shapes, parameter ranges, or schema."""


class GenerationError(RuntimeError):
    """Instance generation failed (rank check exhausted its retries)."""


class EstimationError(RuntimeError):
    """Constant estimation could not produce a usable value."""


class UnsupportedObjectiveError(RuntimeError):
    """Operation is not defined for this objective kind."""


class DivergenceError(RuntimeError):
    """A local iterate became non-finite; carries the offending agent."""

    def __init__(self, agent_id: int, round_k: int):
        super().__init__(f"non-finite iterate for agent {agent_id} in round {round_k}")
        self.agent_id = agent_id
        self.round_k = round_k
