"""
Orchestrator Agent - integrates the coupled network and releases controller updates
"""
from typing import Any, Dict, List, Optional, Sequence, Tuple
import asyncio
import logging

import numpy as np

from modules.integrator import rk4_step
from modules.metrics import branch_counts, compute_run_metrics
from modules.scenario import Scenario
from modules.trajectory import TrajectoryLog
from shared.errors import DivergenceError, IncomparableScenariosError
from shared.schema import ComparisonReport, ComparisonRow, RunMetrics, TriggerStrategy
from shared.settings import get_compare_workers
from triggers import TriggerState, apply_event, get_trigger, should_fire
from .base_agent import BaseAgent
from .follower_agent import FollowerAgent, FollowerNetwork, NetworkTerms
from .leader_agent import LeaderAgent

logger = logging.getLogger(__name__)


class OrchestratorAgent(BaseAgent):
    """Owns the leader, the followers and the concatenated network state"""

    def __init__(self, scenario: Scenario, agent_id: str = "orchestrator"):
        self.scenario = scenario
        self.leader = LeaderAgent(scenario.reference)
        self.followers = [FollowerAgent(i, scenario) for i in range(scenario.n_followers)]
        self.network = FollowerNetwork(scenario, self.followers)
        self.slices = []
        offset = 0
        for agent in [self.leader] + self.followers:
            self.slices.append(slice(offset, offset + agent.state_size))
            offset += agent.state_size
        self._size = offset
        self._follower_part = slice(self.leader.state_size, offset)
        super().__init__(
            agent_id=agent_id,
            agent_type="orchestrator",
            capabilities=["step", "run"],
        )

    def _register_handlers(self):
        self.register_handler("step", self.step)
        self.register_handler("run", self.run)

    @property
    def state_size(self) -> int:
        return self._size

    def initial_state(self) -> np.ndarray:
        return np.concatenate([self.leader.initial_state()] + [f.handle("initial_state") for f in self.followers])

    def local(self, state: np.ndarray, i: int) -> np.ndarray:
        """Slice of follower i (0-based)"""
        return state[self.slices[i + 1]]

    def block(self, state: np.ndarray) -> np.ndarray:
        """Follower slices as rows; a view, so in-place writes reach the state"""
        return self.network.block(state[self._follower_part])

    def evaluate(self, t: float, state: np.ndarray, u: np.ndarray, initialize: bool = False) -> NetworkTerms:
        y_r, y_r_dot = self.leader.handle("broadcast_reference", t)
        return self.network.evaluate(t, self.block(state), y_r, y_r_dot, u, initialize)

    def rhs(self, t: float, state: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Network derivative with every control held"""
        terms = self.evaluate(t, state, u)
        rates = np.zeros(self._size)
        rates[self._follower_part] = self.network.derivative(t, self.block(state), terms, u).reshape(-1)
        return rates

    def step(self, state: np.ndarray, t: float, u: np.ndarray) -> np.ndarray:
        """One RK4 step of size dt under zero-order hold"""
        new_state = rk4_step(lambda tt, yy: self.rhs(tt, yy, u), t, state, self.scenario.dt)
        bad = ~np.all(np.isfinite(self.block(new_state)), axis=1)
        if np.any(bad):
            raise DivergenceError("non-finite state", time=t + self.scenario.dt,
                                  agent=int(np.flatnonzero(bad)[0]))
        return new_state

    # ========================================================================
    # Closed-loop run
    # ========================================================================

    def _record(self, log: TrajectoryLog, row: int, t: float, state: np.ndarray,
                terms: NetworkTerms, u: np.ndarray, triggers: List[TriggerState]):
        cols = self.network.columns
        block = self.block(state)
        log.time[row] = t
        log.x[row] = block[:, cols.x]
        log.x_hat[row] = block[:, cols.x_hat]
        log.tau_hat[row] = block[:, cols.tau_hat]
        log.varpi_hat[row] = terms.varpi_hat
        log.z[row] = terms.z
        log.u[row] = u
        log.w[row] = [s.w_current for s in triggers]
        log.theta[row] = block[:, cols.theta]
        log.w_norm[row] = np.column_stack([np.linalg.norm(block[:, s], axis=1) for s in cols.weights])
        log.psi_norm[row] = terms.psi_norm
        log.alpha[row] = terms.alphas
        log.alpha_bar[row] = block[:, cols.alpha_bar]

    def _release(self, t: float, terms: NetworkTerms, triggers: List[TriggerState],
                 u: np.ndarray, tolerance: float):
        cfg = self.scenario.trigger
        strategy = get_trigger(cfg.strategy)
        for i, (alpha_final, z_n) in enumerate(zip(terms.alpha_final, terms.z_n)):
            w = strategy.candidate(cfg, float(alpha_final), float(z_n), triggers[i].u_applied)
            triggers[i].w_current = w
            branch = should_fire(cfg, triggers[i], w, t, tolerance)
            if branch is not None:
                apply_event(triggers[i], w, t, branch)
                u[i] = w

    def _summarize(self, log: TrajectoryLog, triggers: List[TriggerState], diverged: bool) -> RunMetrics:
        sc = self.scenario
        log.events = sorted((e for s in triggers for e in s.event_log), key=lambda e: (e.time, e.agent))
        metrics = compute_run_metrics(log, triggers, sc.trigger, sc.horizon, sc.dt,
                                      sc.head_end, sc.tail_start, sc.bound_ceiling, diverged=diverged)
        log.metrics = metrics
        return metrics

    def run(self) -> Tuple[TrajectoryLog, RunMetrics]:
        """Integrate over the horizon; deterministic for a given scenario"""
        sc = self.scenario
        n_steps = sc.n_steps
        logger.info(f"🚀 Running {sc.trigger.strategy.value} strategy: "
                    f"{len(self.followers)} followers, {n_steps} steps of {sc.dt}")

        self.status = "running"
        log = TrajectoryLog.allocate(n_steps + 1, len(self.followers), sc.order)
        triggers = [TriggerState(agent=i) for i in range(len(self.followers))]
        u = np.zeros(len(self.followers))
        state = self.initial_state()

        tolerance = 0.5 * sc.dt
        s = 0
        try:
            terms = self.evaluate(0.0, state, u, initialize=True)
            self._release(0.0, terms, triggers, u, 0.0)
            self._record(log, 0, 0.0, state, terms, u, triggers)
            for s in range(1, n_steps + 1):
                t = s * sc.dt
                state = self.step(state, (s - 1) * sc.dt, u)
                terms = self.evaluate(t, state, u)
                self._release(t, terms, triggers, u, tolerance)
                self._record(log, s, t, state, terms, u, triggers)
        except DivergenceError as e:
            logger.error(f"✗ {e}")
            self.status = "diverged"
            partial = log.truncated(s)
            metrics = self._summarize(partial, triggers, diverged=True)
            e.partial = (partial.sampled(sc.log_stride), metrics)
            raise

        metrics = self._summarize(log, triggers, diverged=False)
        self.status = "completed"
        logger.info(f"✓ Run finished: {branch_counts(triggers)} updates by branch")
        return log.sampled(sc.log_stride), metrics


def step(scenario: Scenario, full_state: np.ndarray, t: float, u: Sequence[float]) -> np.ndarray:
    """Advance the network state by one step with the controls u held"""
    return OrchestratorAgent(scenario).step(np.asarray(full_state, dtype=float), t,
                                            np.asarray(u, dtype=float))


def run(scenario: Scenario) -> Tuple[TrajectoryLog, RunMetrics]:
    return OrchestratorAgent(scenario).run()


# ============================================================================
# Strategy comparison
# ============================================================================

def _labels(scenarios: Sequence[Scenario]) -> List[str]:
    seen: Dict[str, int] = {}
    labels = []
    for sc in scenarios:
        name = sc.trigger.strategy.value
        seen[name] = seen.get(name, 0) + 1
        labels.append(name if seen[name] == 1 else f"{name}#{seen[name]}")
    return labels


def check_comparable(scenarios: Sequence[Scenario]):
    if not scenarios:
        raise IncomparableScenariosError("nothing to compare")
    reference = scenarios[0].fingerprint()
    for index, sc in enumerate(scenarios[1:], start=1):
        if sc.fingerprint() != reference:
            raise IncomparableScenariosError(
                f"scenario {index} differs from scenario 0 outside the trigger configuration"
            )


async def _run_one(scenario: Scenario, label: str, limiter: asyncio.Semaphore) -> Dict[str, Any]:
    async with limiter:
        try:
            _, metrics = await asyncio.to_thread(run, scenario)
            return {"success": True, "label": label, "metrics": metrics}
        except DivergenceError as e:
            return {"success": False, "label": label, "error": str(e)}


def build_comparison(results: List[Dict[str, Any]]) -> ComparisonReport:
    """Table-I style rows from per-strategy outcomes"""
    report = ComparisonReport(strategies=[r["label"] for r in results])
    done = {r["label"]: r["metrics"] for r in results if r["success"]}
    report.errors = {r["label"]: r["error"] for r in results if not r["success"]}
    if not done:
        return report

    n_followers = len(next(iter(done.values())).agents)
    for i in range(n_followers):
        per = {label: m.agents[i] for label, m in done.items()}
        switch = per.get(TriggerStrategy.SWITCH.value)
        ordering: Optional[bool] = None
        names = [s.value for s in (TriggerStrategy.RELATIVE, TriggerStrategy.SWITCH, TriggerStrategy.FIXED)]
        if all(name in per for name in names):
            counts = [per[name].update_count for name in names]
            ordering = counts[0] <= counts[1] <= counts[2]
        report.rows.append(ComparisonRow(
            agent=i + 1,
            updates={label: a.update_count for label, a in per.items()},
            switch_relative=switch.relative_branch_count if switch else 0,
            switch_fixed=switch.fixed_branch_count if switch else 0,
            min_interval={label: a.min_interval for label, a in per.items()},
            tracking_rms_tail={label: a.tracking_rms_tail for label, a in per.items()},
            max_update_jump={label: a.max_update_jump for label, a in per.items()},
            ordering_ok=ordering,
        ))

    if TriggerStrategy.PERIODIC.value in done:
        report.periodic_updates = [a.update_count for a in done[TriggerStrategy.PERIODIC.value].agents]
    if TriggerStrategy.SWITCH.value in done:
        report.switch_split_ok = any(row.switch_relative > 0 and row.switch_fixed > 0
                                     for row in report.rows)
    return report


async def compare_async(scenarios: Sequence[Scenario], max_workers: Optional[int] = None) -> ComparisonReport:
    """Run scenarios that differ only in their trigger configuration, concurrently"""
    check_comparable(scenarios)
    limiter = asyncio.Semaphore(max_workers or get_compare_workers())
    labels = _labels(scenarios)
    logger.info(f"🚀 Comparing {', '.join(labels)}")
    results = await asyncio.gather(*[_run_one(sc, label, limiter) for sc, label in zip(scenarios, labels)])
    report = build_comparison(list(results))
    for label, error in report.errors.items():
        logger.warning(f"✗ {label} diverged: {error}")
    logger.info(f"✓ Comparison complete ({len(results) - len(report.errors)}/{len(results)} runs)")
    return report


def compare(scenarios: Sequence[Scenario], max_workers: Optional[int] = None) -> ComparisonReport:
    return asyncio.run(compare_async(scenarios, max_workers))


def strategy_variants(scenario: Scenario,
                      strategies: Sequence[TriggerStrategy] = tuple(TriggerStrategy)) -> List[Scenario]:
    """The base scenario once per strategy"""
    return [scenario.with_strategy(s) for s in strategies]
