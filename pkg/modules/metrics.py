"""
Run summaries: trigger economy, inter-event intervals, tracking quality and boundedness
"""
from typing import List, Optional
import logging

import numpy as np

from modules.trajectory import TrajectoryLog
from shared.schema import AgentMetrics, RunMetrics, TriggerBranch, TriggerSection
from triggers import TriggerState, get_trigger

logger = logging.getLogger(__name__)

ZENO_SLACK = 0.5


def window_rms(time: np.ndarray, values: np.ndarray, start: float = -np.inf, end: float = np.inf) -> float:
    """RMS over start ≤ t ≤ end; an empty window falls back to the whole series"""
    mask = (time >= start) & (time <= end)
    selected = values[mask] if np.any(mask) else values
    return float(np.sqrt(np.mean(selected ** 2))) if selected.size else 0.0


def inter_event_intervals(event_times: List[float]) -> np.ndarray:
    return np.diff(np.asarray(event_times, dtype=float))


def zeno_bound(floor: Optional[float], max_w_rate: float) -> Optional[float]:
    """Lower bound on inter-event time: threshold floor over the steepest |ẇ|"""
    if floor is None or max_w_rate <= 0.0 or not np.isfinite(max_w_rate):
        return None
    return floor / max_w_rate


def agent_metrics(log: TrajectoryLog, state: TriggerState, cfg: TriggerSection, dt: float,
                  head_end: float, tail_start: float, ceiling: float) -> AgentMetrics:
    i = state.agent
    times = [e.time for e in state.event_log]
    intervals = inter_event_intervals(times)
    z1 = log.z[:, i, 0]
    tail = log.time >= tail_start
    w = log.w[:, i]
    max_w_rate = float(np.max(np.abs(np.diff(w))) / dt) if w.size > 1 else 0.0
    floor = get_trigger(cfg.strategy).floor(cfg)
    bound = zeno_bound(floor, max_w_rate)
    min_interval = float(intervals.min()) if intervals.size else None

    head_rms = window_rms(log.time, z1, end=head_end)
    tail_rms = window_rms(log.time, z1, start=tail_start)

    applied = [e.u for e in state.event_log]
    jumps = np.abs(np.diff(applied)) if len(applied) > 1 else np.zeros(0)
    peaks = {
        "max_abs_z": float(np.max(np.abs(log.z[:, i]), initial=0.0)),
        "max_psi_norm": float(np.max(log.psi_norm[:, i], initial=0.0)),
        "max_abs_theta": float(np.max(np.abs(log.theta[:, i]), initial=0.0)),
        "max_weight_norm": float(np.max(log.w_norm[:, i], initial=0.0)),
    }
    bounded = all(np.isfinite(v) and v < ceiling for v in peaks.values())

    return AgentMetrics(
        agent=i + 1,
        event_count=len(state.event_log),
        update_count=state.update_count,
        fixed_branch_count=state.event_count_fixed_branch,
        relative_branch_count=state.event_count_relative_branch,
        min_interval=min_interval,
        mean_interval=float(intervals.mean()) if intervals.size else None,
        tracking_rms_head=head_rms,
        tracking_rms_tail=tail_rms,
        convergence_ratio=tail_rms / head_rms if head_rms > 0.0 else None,
        max_abs_z1_tail=float(np.max(np.abs(z1[tail]))) if np.any(tail) else float(np.max(np.abs(z1), initial=0.0)),
        max_w_rate=max_w_rate,
        zeno_floor=floor,
        zeno_bound=bound,
        zeno_ok=None if bound is None or min_interval is None else min_interval >= ZENO_SLACK * bound,
        max_abs_u=float(np.max(np.abs(log.u[:, i]), initial=0.0)),
        max_update_jump=float(jumps.max()) if jumps.size else 0.0,
        bounded=bounded,
        **peaks,
    )


def compute_run_metrics(log: TrajectoryLog, states: List[TriggerState], cfg: TriggerSection,
                        horizon: float, dt: float, head_end: float, tail_start: float,
                        ceiling: float, diverged: bool = False) -> RunMetrics:
    """Summarize a full-resolution trajectory"""
    metrics = RunMetrics(
        strategy=cfg.strategy,
        horizon=horizon,
        dt=dt,
        steps=max(log.n_samples - 1, 0),
        diverged=diverged,
        agents=[agent_metrics(log, s, cfg, dt, head_end, tail_start, ceiling) for s in states],
    )
    for entry in metrics.agents:
        logger.info(f"  follower {entry.agent}: {entry.update_count} updates "
                    f"(fixed {entry.fixed_branch_count}, relative {entry.relative_branch_count}), "
                    f"tail RMS {entry.tracking_rms_tail:.3e}")
    return metrics


def branch_counts(states: List[TriggerState]) -> dict:
    return {
        TriggerBranch.FIXED.value: sum(s.event_count_fixed_branch for s in states),
        TriggerBranch.RELATIVE.value: sum(s.event_count_relative_branch for s in states),
        TriggerBranch.PERIODIC.value: sum(s.event_count_periodic for s in states),
    }
