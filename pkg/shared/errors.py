"""
Exception hierarchy for the consensus simulator
"""
from typing import Optional


class ConsensusError(Exception):
    """Base class for every error raised by the simulator"""


class TopologyError(ConsensusError):
    """Communication graph could not be constructed"""


class DimensionMismatchError(TopologyError):
    """Adjacency / pinning shapes disagree"""


class SelfLoopError(TopologyError):
    """Adjacency matrix has a non-zero diagonal entry"""


class IsolatedFollowerError(TopologyError):
    """A follower receives information from nobody (d_i + b_i = 0)"""

    def __init__(self, follower: int):
        self.follower = follower
        super().__init__(f"follower {follower + 1} is isolated: in-degree + pinning gain is zero")


class InvalidAdjacencyError(TopologyError):
    """Adjacency entries outside {0, 1}"""


class AgentIndexError(ConsensusError, IndexError):
    """Follower index out of range"""


class ShapeError(ConsensusError, ValueError):
    """Vector or matrix dimensions are inconsistent"""


class DivergenceError(ConsensusError):
    """Non-finite value encountered while integrating the closed loop"""

    def __init__(self, message: str, time: Optional[float] = None,
                 agent: Optional[int] = None, level: Optional[int] = None):
        self.reason = message
        self.time = time
        self.agent = agent
        self.level = level
        self.partial = None
        details = []
        if time is not None:
            details.append(f"t={time:.6g}")
        if agent is not None:
            details.append(f"agent={agent + 1}")
        if level is not None:
            details.append(f"level={level + 1}")
        suffix = f" ({', '.join(details)})" if details else ""
        super().__init__(f"{message}{suffix}")


class NotHurwitzError(ConsensusError):
    """Observer matrix has an eigenvalue with non-negative real part"""


class EventOrderError(ConsensusError):
    """Trigger events must have strictly increasing times"""


class ConfigError(ConsensusError):
    """Scenario file is missing fields, mistyped or violates a side condition"""

    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}" if field_path else message)


class IncomparableScenariosError(ConsensusError):
    """Scenarios passed to compare differ in more than their trigger config"""
