"""
Base Agent class for leader / follower nodes of the consensus network
"""
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict
import logging

import numpy as np

logger = logging.getLogger(__name__)


class BaseAgent(ABC):
    """Abstract base class for agents"""

    def __init__(self, agent_id: str, agent_type: str, capabilities: list):
        self.agent_id = agent_id
        self.agent_type = agent_type
        self.capabilities = capabilities
        self.status = "idle"
        self.handlers: Dict[str, Callable] = {}

        self._register_handlers()

        logger.debug(f"✓ Initialized {agent_type} agent: {agent_id}")

    @abstractmethod
    def _register_handlers(self):
        """Register the actions this agent answers - must be implemented by subclasses"""
        pass

    def register_handler(self, action: str, handler: Callable):
        self.handlers[action] = handler

    def handle(self, action: str, *args, **kwargs) -> Any:
        """Dispatch an action by name"""
        if action not in self.handlers:
            raise KeyError(f"{self.agent_id} has no handler for {action!r}")
        return self.handlers[action](*args, **kwargs)

    @property
    @abstractmethod
    def state_size(self) -> int:
        """Length of this agent's slice of the network state"""

    @abstractmethod
    def initial_state(self) -> np.ndarray:
        """Slice of the network state at t = 0"""

    def get_status(self) -> Dict[str, Any]:
        """Get agent status"""
        return {
            "agent_id": self.agent_id,
            "agent_type": self.agent_type,
            "status": self.status,
            "capabilities": self.capabilities,
            "state_size": self.state_size,
        }
