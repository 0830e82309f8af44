"""
Fixed, relative, switch and periodic controller-update strategies
"""
from typing import Optional
import math

from shared.schema import TriggerBranch, TriggerStrategy
from .base_trigger import BaseTrigger, TriggerConfig, TriggerState, register_trigger


def candidate_fixed(cfg: TriggerConfig, alpha_final: float, z_n: float) -> float:
    """w = α − π̄ tanh(z_n π̄ / μ)"""
    return alpha_final - cfg.pi_bar * math.tanh(z_n * cfg.pi_bar / cfg.mu)


def candidate_relative(cfg: TriggerConfig, alpha_final: float, z_n: float) -> float:
    """w = −(1 + Δ)(α tanh(z_n α / μ) + π̄* tanh(z_n π̄* / μ))"""
    return -(1.0 + cfg.delta) * (
        alpha_final * math.tanh(z_n * alpha_final / cfg.mu)
        + cfg.pi_bar_star * math.tanh(z_n * cfg.pi_bar_star / cfg.mu)
    )


def fixed_threshold_exceeded(cfg: TriggerConfig, u_applied: float, w_now: float) -> bool:
    return abs(w_now - u_applied) >= cfg.pi


def relative_threshold_exceeded(cfg: TriggerConfig, u_applied: float, w_now: float) -> bool:
    return abs(w_now - u_applied) >= cfg.delta * abs(u_applied) + cfg.pi_star


def uses_relative_branch(cfg: TriggerConfig, u_applied: float) -> bool:
    """Switch gate: relative test when |u| ≥ G"""
    return abs(u_applied) >= cfg.gate


@register_trigger
class FixedThresholdTrigger(BaseTrigger):
    name = TriggerStrategy.FIXED

    def candidate(self, cfg, alpha_final, z_n, u_applied):
        return candidate_fixed(cfg, alpha_final, z_n)

    def test(self, cfg, state: TriggerState, w_now, t, step_tolerance) -> Optional[TriggerBranch]:
        return TriggerBranch.FIXED if fixed_threshold_exceeded(cfg, state.u_applied, w_now) else None

    def floor(self, cfg):
        return cfg.pi


@register_trigger
class RelativeThresholdTrigger(BaseTrigger):
    name = TriggerStrategy.RELATIVE

    def candidate(self, cfg, alpha_final, z_n, u_applied):
        return candidate_relative(cfg, alpha_final, z_n)

    def test(self, cfg, state: TriggerState, w_now, t, step_tolerance) -> Optional[TriggerBranch]:
        if relative_threshold_exceeded(cfg, state.u_applied, w_now):
            return TriggerBranch.RELATIVE
        return None

    def floor(self, cfg):
        return cfg.pi_star


@register_trigger
class SwitchThresholdTrigger(BaseTrigger):
    """One control law; the held magnitude picks the relative or the fixed test"""
    name = TriggerStrategy.SWITCH

    def candidate(self, cfg, alpha_final, z_n, u_applied):
        return candidate_fixed(cfg, alpha_final, z_n)

    def test(self, cfg, state: TriggerState, w_now, t, step_tolerance) -> Optional[TriggerBranch]:
        if uses_relative_branch(cfg, state.u_applied):
            if relative_threshold_exceeded(cfg, state.u_applied, w_now):
                return TriggerBranch.RELATIVE
            return None
        return TriggerBranch.FIXED if fixed_threshold_exceeded(cfg, state.u_applied, w_now) else None

    def floor(self, cfg):
        return max(cfg.pi, cfg.pi_star)


@register_trigger
class PeriodicTrigger(BaseTrigger):
    """Sampled-data baseline: raw control law released every period"""
    name = TriggerStrategy.PERIODIC

    def candidate(self, cfg, alpha_final, z_n, u_applied):
        return alpha_final

    def test(self, cfg, state: TriggerState, w_now, t, step_tolerance) -> Optional[TriggerBranch]:
        if t - state.last_event_time >= cfg.period - step_tolerance:
            return TriggerBranch.PERIODIC
        return None
