"""
Base trigger strategy, the zero-order-hold trigger state and the strategy registry
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Type
import bisect
import logging

from shared.errors import ConfigError, EventOrderError
from shared.schema import TriggerBranch, TriggerEvent, TriggerSection, TriggerStrategy

logger = logging.getLogger(__name__)

TriggerConfig = TriggerSection


@dataclass
class TriggerState:
    """Held control of one follower and its release history"""
    agent: int
    u_applied: float = 0.0
    w_current: float = 0.0
    last_event_time: Optional[float] = None
    event_count_fixed_branch: int = 0
    event_count_relative_branch: int = 0
    event_count_periodic: int = 0
    event_log: List[TriggerEvent] = field(default_factory=list)

    @property
    def vartheta(self) -> float:
        """Measurement error w − u"""
        return self.w_current - self.u_applied

    @property
    def update_count(self) -> int:
        """Releases after the initialization event"""
        return (self.event_count_fixed_branch + self.event_count_relative_branch
                + self.event_count_periodic)

    def u_at(self, t: float) -> float:
        """Held control at time t (zero-order hold over the event log)"""
        if not self.event_log or t < self.event_log[0].time:
            raise EventOrderError(f"no control applied before t={t}")
        times = [e.time for e in self.event_log]
        return self.event_log[bisect.bisect_right(times, t) - 1].u


class BaseTrigger(ABC):
    """One controller-update strategy: a candidate law plus a release test"""

    name: TriggerStrategy

    @abstractmethod
    def candidate(self, cfg: TriggerConfig, alpha_final: float, z_n: float, u_applied: float) -> float:
        """Candidate control w"""

    @abstractmethod
    def test(self, cfg: TriggerConfig, state: TriggerState, w_now: float, t: float,
             step_tolerance: float) -> Optional[TriggerBranch]:
        """Branch that releases at t, or None"""

    def floor(self, cfg: TriggerConfig) -> Optional[float]:
        """Smallest jump |w − u| that can release an event"""
        return None


_REGISTRY: Dict[TriggerStrategy, BaseTrigger] = {}


def register_trigger(cls: Type[BaseTrigger]) -> Type[BaseTrigger]:
    """Class decorator adding a strategy to the registry"""
    _REGISTRY[cls.name] = cls()
    logger.debug(f"  Registered trigger: {cls.name.value}")
    return cls


def get_trigger(strategy) -> BaseTrigger:
    try:
        return _REGISTRY[TriggerStrategy(strategy)]
    except (ValueError, KeyError):
        valid = ", ".join(s.value for s in TriggerStrategy)
        raise ConfigError("trigger.strategy", f"unknown strategy {strategy!r}; valid: {valid}")


def list_triggers() -> List[str]:
    return [s.value for s in _REGISTRY]


def should_fire(cfg: TriggerConfig, state: TriggerState, w_now: float, t: float,
                step_tolerance: float = 0.0) -> Optional[TriggerBranch]:
    """Release decision of the configured strategy; the first call always releases"""
    if state.last_event_time is None:
        return TriggerBranch.INIT
    return get_trigger(cfg.strategy).test(cfg, state, w_now, t, step_tolerance)


def apply_event(state: TriggerState, w_now: float, t: float, branch: TriggerBranch) -> TriggerState:
    """u := w at t; event times must strictly increase"""
    if state.last_event_time is not None and not t > state.last_event_time:
        raise EventOrderError(
            f"follower {state.agent + 1}: event at t={t} does not follow t={state.last_event_time}"
        )
    state.u_applied = w_now
    state.w_current = w_now
    state.last_event_time = t
    if branch == TriggerBranch.FIXED:
        state.event_count_fixed_branch += 1
    elif branch == TriggerBranch.RELATIVE:
        state.event_count_relative_branch += 1
    elif branch == TriggerBranch.PERIODIC:
        state.event_count_periodic += 1
    state.event_log.append(TriggerEvent(time=t, agent=state.agent + 1, branch=branch, u=w_now))
    return state
