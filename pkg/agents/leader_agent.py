"""
Leader Agent - broadcasts the reference trajectory to pinned followers
"""
from typing import Tuple
import logging

import numpy as np

from modules.plant import ReferenceSignal
from .base_agent import BaseAgent

logger = logging.getLogger(__name__)


class LeaderAgent(BaseAgent):
    """Agent 0: carries no integrated state, only y_r(t) and ẏ_r(t)"""

    def __init__(self, reference: ReferenceSignal):
        self.reference = reference
        super().__init__(
            agent_id="leader",
            agent_type="leader",
            capabilities=["broadcast_reference"],
        )

    def _register_handlers(self):
        self.register_handler("broadcast_reference", self.broadcast)

    @property
    def state_size(self) -> int:
        return 0

    def initial_state(self) -> np.ndarray:
        return np.zeros(0)

    def broadcast(self, t: float) -> Tuple[float, float]:
        """(y_r, ẏ_r) at t"""
        return self.reference.y_r(t), self.reference.y_r_dot(t)
