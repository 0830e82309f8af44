"""
Immutable run description assembled from a validated scenario document
"""
from dataclasses import dataclass, replace
from typing import Optional, Tuple
import hashlib
import logging

import numpy as np

from modules.controller import ControllerGains, nn_input_dim
from modules.graph import Topology, build_topology
from modules.observer import ObserverGains
from modules.plant import (
    PlantDynamics,
    ReferenceSignal,
    benchmark_dynamics,
    benchmark_reference,
    expression_dynamics,
    expression_reference,
)
from modules.rbf import RbfLayout, default_layout
from shared.schema import ScenarioFile, TriggerSection, TriggerStrategy

logger = logging.getLogger(__name__)

OBSERVER_NETWORK = 0
CONTROLLER_NETWORK = 1


@dataclass(frozen=True)
class Scenario:
    """Everything a run needs; shared read-only between concurrent runs"""
    topology: Topology
    plant: PlantDynamics
    reference: ReferenceSignal
    observer_gains: ObserverGains
    controller_gains: ControllerGains
    observer_layouts: Tuple[Tuple[RbfLayout, ...], ...]
    controller_layouts: Tuple[Tuple[RbfLayout, ...], ...]
    trigger: TriggerSection
    initial_state: np.ndarray
    initial_estimate: np.ndarray
    horizon: float = 5.0
    dt: float = 0.001
    log_stride: int = 1
    seed: int = 0
    tail_start: float = 3.0
    head_end: float = 0.5
    bound_ceiling: float = 1e3
    output_dir: str = "results"

    @property
    def n_followers(self) -> int:
        return self.topology.n_followers

    @property
    def order(self) -> int:
        return self.plant.order

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))

    def with_trigger(self, trigger: TriggerSection) -> "Scenario":
        return replace(self, trigger=trigger)

    def with_strategy(self, strategy: TriggerStrategy) -> "Scenario":
        return self.with_trigger(self.trigger.model_copy(update={"strategy": TriggerStrategy(strategy)}))

    def fingerprint(self) -> str:
        """Digest of every field except the trigger configuration"""
        digest = hashlib.sha256()
        arrays = [
            self.topology.adjacency, self.topology.pinning,
            self.observer_gains.q, self.observer_gains.kappa,
            self.controller_gains.r, self.controller_gains.c, self.controller_gains.eta,
            self.controller_gains.h, self.controller_gains.m,
            self.initial_state, self.initial_estimate,
        ]
        for group in (self.observer_layouts, self.controller_layouts):
            for layouts in group:
                for layout in layouts:
                    arrays.extend([layout.centers, layout.widths])
        for arr in arrays:
            digest.update(np.ascontiguousarray(arr, dtype=float).tobytes())
        digest.update(repr((
            self.plant.label, self.reference.label, self.controller_gains.lam,
            self.controller_gains.o, self.controller_gains.compensate,
            self.horizon, self.dt, self.log_stride, self.seed,
            self.tail_start, self.head_end, self.bound_ceiling,
        )).encode())
        return digest.hexdigest()


def build_layouts(topology: Topology, order: int, rbf_settings, seed: int):
    """Observer networks read x̂ prefixes, controller networks read T_k"""
    observer, controller = [], []
    for i in range(topology.n_followers):
        observer.append(tuple(
            default_layout(level, rbf_settings, (seed, i, level, OBSERVER_NETWORK))
            for level in range(1, order + 1)
        ))
        n_neighbors = len(topology.neighbors[i])
        controller.append(tuple(
            default_layout(nn_input_dim(k, n_neighbors), rbf_settings, (seed, i, k, CONTROLLER_NETWORK))
            for k in range(1, order + 1)
        ))
    return tuple(observer), tuple(controller)


def build_scenario(doc: ScenarioFile) -> Scenario:
    """Compile a validated document into runtime objects"""
    topology = build_topology(doc.topology.adjacency, doc.topology.pinning)

    if doc.plant.model == "benchmark":
        plant = benchmark_dynamics()
    else:
        plant = expression_dynamics(doc.plant.drift, doc.plant.disturbance)
    if doc.reference.model == "benchmark":
        reference = benchmark_reference()
    else:
        reference = expression_reference(doc.reference.value, doc.reference.derivative)

    observer_gains = ObserverGains(q=doc.observer.q, kappa=doc.observer.resolved_kappa())
    ctrl = doc.controller
    controller_gains = ControllerGains(r=ctrl.r, c=ctrl.c, eta=ctrl.eta, h=ctrl.h, m=ctrl.m,
                                       lam=ctrl.lam, o=ctrl.o, compensate=ctrl.compensation)
    observer_layouts, controller_layouts = build_layouts(topology, plant.order, doc.rbf, doc.sim.seed)

    initial_state = np.array(doc.plant.initial_state, dtype=float)
    initial_estimate = np.array(doc.observer.initial_estimate, dtype=float)
    for arr in (initial_state, initial_estimate):
        arr.setflags(write=False)

    scenario = Scenario(
        topology=topology,
        plant=plant,
        reference=reference,
        observer_gains=observer_gains,
        controller_gains=controller_gains,
        observer_layouts=observer_layouts,
        controller_layouts=controller_layouts,
        trigger=doc.trigger,
        initial_state=initial_state,
        initial_estimate=initial_estimate,
        horizon=doc.sim.horizon,
        dt=doc.sim.dt,
        log_stride=doc.output.stride,
        seed=doc.sim.seed,
        tail_start=doc.sim.tail_start,
        head_end=doc.sim.head_end,
        bound_ceiling=doc.sim.bound_ceiling,
        output_dir=doc.output.directory,
    )
    logger.info(f"✓ Scenario ready: {scenario.n_followers} followers, order {scenario.order}, "
                f"{scenario.n_steps} steps, strategy {scenario.trigger.strategy.value}")
    return scenario
