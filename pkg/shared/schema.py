"""
Scenario file schema, event records and run summaries
"""
from enum import Enum
from typing import Dict, Any, Optional, List, Literal, Tuple
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, model_validator

from modules.observer import companion_matrix, is_hurwitz


class TriggerStrategy(str, Enum):
    """Controller-update strategies"""
    FIXED = "fixed"
    RELATIVE = "relative"
    SWITCH = "switch"
    PERIODIC = "periodic"


class TriggerBranch(str, Enum):
    """Which test released an event"""
    INIT = "init"
    FIXED = "fixed"
    RELATIVE = "relative"
    PERIODIC = "periodic"


class SideCondition(BaseModel):
    """Outcome of one design side condition"""
    name: str
    field: str
    passed: bool
    detail: str = ""


def _lenient(info: ValidationInfo) -> bool:
    return bool(info.context and info.context.get("lenient"))


def _raise_failed(conditions: List[SideCondition]):
    for cond in conditions:
        if not cond.passed:
            raise ValueError(f"{cond.field}: {cond.name} violated ({cond.detail})")


class StrictModel(BaseModel):
    """Base for scenario sections: unknown keys are rejected"""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


# ============================================================================
# Scenario file sections
# ============================================================================

class TopologySection(StrictModel):
    """Directed graph among followers plus leader pinning gains"""
    adjacency: List[List[int]] = Field(..., description="a_ij = 1 if follower i receives from follower j")
    pinning: List[float] = Field(..., description="b_i, leader-to-follower gains")


class PlantSection(StrictModel):
    """Follower dynamics and true initial states"""
    model: Literal["benchmark", "expression"] = "benchmark"
    order: Optional[int] = Field(default=None, ge=1)
    drift: Optional[List[str]] = Field(default=None, description="f_k in x1..xk")
    disturbance: Optional[List[str]] = Field(default=None, description="xi_k in x1..xn and t")
    initial_state: List[List[float]]

    @model_validator(mode="after")
    def _check_model(self):
        if self.model == "benchmark":
            if self.order not in (None, 2):
                raise ValueError("benchmark plant has order 2")
            if self.drift is not None or self.disturbance is not None:
                raise ValueError("benchmark plant takes no drift/disturbance expressions")
        else:
            if self.order is None or self.drift is None or self.disturbance is None:
                raise ValueError("expression plant needs order, drift and disturbance")
            if len(self.drift) != self.order or len(self.disturbance) != self.order:
                raise ValueError("drift and disturbance need one expression per level")
        return self

    @property
    def resolved_order(self) -> int:
        return 2 if self.model == "benchmark" else int(self.order)


class ReferenceSection(StrictModel):
    """Leader trajectory"""
    model: Literal["benchmark", "expression"] = "benchmark"
    value: Optional[str] = None
    derivative: Optional[str] = None

    @model_validator(mode="after")
    def _check_model(self):
        if self.model == "expression" and (self.value is None or self.derivative is None):
            raise ValueError("expression reference needs value and derivative")
        if self.model == "benchmark" and (self.value is not None or self.derivative is not None):
            raise ValueError("benchmark reference takes no expressions")
        return self


class ObserverSection(StrictModel):
    """State / disturbance observer gains"""
    q: List[float]
    kappa: Optional[List[float]] = Field(default=None, description="defaults to 2 per level")
    initial_estimate: List[List[float]]

    def resolved_kappa(self) -> List[float]:
        return list(self.kappa) if self.kappa is not None else [2.0] * len(self.q)

    def side_conditions(self) -> List[SideCondition]:
        hurwitz = is_hurwitz(companion_matrix(self.q))
        kappa = self.resolved_kappa()
        return [
            SideCondition(name="P Hurwitz", field="observer.q", passed=hurwitz,
                          detail=f"q={self.q}"),
            SideCondition(name="κ > 3/2", field="observer.kappa",
                          passed=all(k > 1.5 for k in kappa), detail=f"kappa={kappa}"),
        ]

    @model_validator(mode="after")
    def _check_conditions(self, info: ValidationInfo):
        if not _lenient(info):
            _raise_failed(self.side_conditions())
        return self


class ControllerSection(StrictModel):
    """Backstepping, filter and adaptive-law gains"""
    r: List[float]
    c: List[float]
    eta: List[float]
    h: List[float]
    m: List[float]
    lam: float = Field(..., alias="lambda")
    o: float
    compensation: bool = True

    def side_conditions(self) -> List[SideCondition]:
        return [
            SideCondition(name="r < 0", field="controller.r",
                          passed=all(v < 0 for v in self.r), detail=f"r={self.r}"),
            SideCondition(name="c > 0", field="controller.c",
                          passed=all(v > 0 for v in self.c), detail=f"c={self.c}"),
            SideCondition(name="η > 0", field="controller.eta",
                          passed=all(v > 0 for v in self.eta), detail=f"eta={self.eta}"),
            SideCondition(name="h > 0", field="controller.h",
                          passed=all(v > 0 for v in self.h), detail=f"h={self.h}"),
            SideCondition(name="m > 0", field="controller.m",
                          passed=all(v > 0 for v in self.m), detail=f"m={self.m}"),
            SideCondition(name="λ > 0", field="controller.lambda",
                          passed=self.lam > 0, detail=f"lambda={self.lam}"),
            SideCondition(name="o > 0", field="controller.o",
                          passed=self.o > 0, detail=f"o={self.o}"),
        ]

    @model_validator(mode="after")
    def _check_conditions(self, info: ValidationInfo):
        if not _lenient(info):
            _raise_failed(self.side_conditions())
        return self


class RbfSection(StrictModel):
    """Network layout parameters"""
    span: Tuple[float, float] = (-2.0, 2.0)
    nodes_1d: int = Field(default=11, ge=1)
    nodes_per_axis_2d: int = Field(default=5, ge=1)
    scattered_nodes: int = Field(default=30, ge=1)
    scattered_width: float = Field(default=2.0, gt=0)

    @model_validator(mode="after")
    def _check_span(self):
        if not self.span[1] > self.span[0]:
            raise ValueError("span upper bound must exceed lower bound")
        return self


class TriggerSection(StrictModel):
    """Event-trigger strategy and thresholds"""
    strategy: TriggerStrategy = TriggerStrategy.FIXED
    pi: float = 2.5
    pi_bar: float = 4.0
    mu: float = 5.4
    delta: float = 0.245
    pi_star: float = 2.0
    pi_bar_star: float = 4.0
    gate: float = 6.0
    period: float = 0.001

    def side_conditions(self) -> List[SideCondition]:
        positive = {name: getattr(self, name) for name in
                    ("pi", "pi_bar", "mu", "pi_star", "pi_bar_star", "gate", "period")}
        delta_ok = 0.0 < self.delta < 1.0
        relative_floor = self.pi_star / (1.0 - self.delta) if delta_ok else float("inf")
        conditions = [
            SideCondition(name="π̄ > π", field="trigger.pi_bar", passed=self.pi_bar > self.pi,
                          detail=f"pi_bar={self.pi_bar}, pi={self.pi}"),
            SideCondition(name="0 < Δ < 1", field="trigger.delta", passed=delta_ok,
                          detail=f"delta={self.delta}"),
            SideCondition(name="π̄* > π*/(1−Δ)", field="trigger.pi_bar_star",
                          passed=self.pi_bar_star > relative_floor,
                          detail=f"pi_bar_star={self.pi_bar_star}, bound={relative_floor:.6g}"),
        ]
        for name, value in positive.items():
            conditions.append(SideCondition(name=f"{name} > 0", field=f"trigger.{name}",
                                            passed=value > 0, detail=f"{name}={value}"))
        return conditions

    @model_validator(mode="after")
    def _check_conditions(self, info: ValidationInfo):
        if not _lenient(info):
            _raise_failed(self.side_conditions())
        return self


class SimSection(StrictModel):
    """Integration grid and metric windows"""
    horizon: float = Field(default=5.0, gt=0)
    dt: float = Field(default=0.001, gt=0)
    seed: int = 0
    tail_start: float = 3.0
    head_end: float = 0.5
    bound_ceiling: float = Field(default=1e3, gt=0)

    @model_validator(mode="after")
    def _check_grid(self):
        if self.horizon < self.dt:
            raise ValueError("horizon must be at least one step")
        return self


class OutputSection(StrictModel):
    """Artifact location and log decimation"""
    directory: str = "results"
    stride: int = Field(default=1, ge=1)


class ScenarioFile(StrictModel):
    """Complete scenario document"""
    topology: TopologySection
    plant: PlantSection
    reference: ReferenceSection = Field(default_factory=ReferenceSection)
    observer: ObserverSection
    controller: ControllerSection
    rbf: RbfSection = Field(default_factory=RbfSection)
    trigger: TriggerSection = Field(default_factory=TriggerSection)
    sim: SimSection = Field(default_factory=SimSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _check_dimensions(self):
        n_followers = len(self.topology.adjacency)
        order = self.plant.resolved_order
        expectations = {
            "plant.initial_state": (self.plant.initial_state, n_followers, order),
            "observer.initial_estimate": (self.observer.initial_estimate, n_followers, order),
        }
        for path, (rows, count, width) in expectations.items():
            if len(rows) != count or any(len(row) != width for row in rows):
                raise ValueError(f"{path}: expected {count} rows of {width} values")
        per_level = {
            "observer.q": self.observer.q,
            "observer.kappa": self.observer.resolved_kappa(),
            "controller.r": self.controller.r,
            "controller.c": self.controller.c,
            "controller.eta": self.controller.eta,
            "controller.h": self.controller.h,
        }
        for path, values in per_level.items():
            if len(values) != order:
                raise ValueError(f"{path}: expected {order} values, got {len(values)}")
        if len(self.controller.m) != order - 1:
            raise ValueError(f"controller.m: expected {order - 1} values, got {len(self.controller.m)}")
        return self

    def side_conditions(self) -> List[SideCondition]:
        """Every design side condition, evaluated without raising"""
        return (self.observer.side_conditions()
                + self.controller.side_conditions()
                + self.trigger.side_conditions())


# ============================================================================
# Event and summary records
# ============================================================================

class TriggerEvent(BaseModel):
    """One controller update (u := w) of one follower"""
    time: float
    agent: int = Field(..., description="1-based follower index")
    branch: TriggerBranch
    u: float


class AgentMetrics(BaseModel):
    """Per-follower run summary"""
    agent: int
    event_count: int = Field(..., ge=1, description="includes the t = 0 initialization")
    update_count: int = Field(..., ge=0)
    fixed_branch_count: int = 0
    relative_branch_count: int = 0
    min_interval: Optional[float] = None
    mean_interval: Optional[float] = None
    tracking_rms_head: float
    tracking_rms_tail: float
    convergence_ratio: Optional[float] = Field(default=None, description="tail RMS over head RMS")
    max_abs_z1_tail: float
    max_w_rate: float
    zeno_floor: Optional[float] = None
    zeno_bound: Optional[float] = None
    zeno_ok: Optional[bool] = None
    max_abs_u: float
    max_update_jump: float
    max_abs_z: float
    max_psi_norm: float
    max_abs_theta: float
    max_weight_norm: float
    bounded: bool


class RunMetrics(BaseModel):
    """Summary of one closed-loop run"""
    strategy: TriggerStrategy
    horizon: float
    dt: float
    steps: int
    diverged: bool = False
    agents: List[AgentMetrics] = Field(default_factory=list)

    def as_key_values(self) -> Dict[str, Any]:
        """Flatten into dotted keys for the text summary"""
        flat: Dict[str, Any] = {
            "strategy": self.strategy.value,
            "horizon": self.horizon,
            "dt": self.dt,
            "steps": self.steps,
            "diverged": self.diverged,
        }
        for entry in self.agents:
            for key, value in entry.model_dump(exclude={"agent"}).items():
                flat[f"agent_{entry.agent}.{key}"] = value
        return flat


class ComparisonRow(BaseModel):
    """One follower across strategies"""
    agent: int
    updates: Dict[str, int]
    switch_relative: int
    switch_fixed: int
    min_interval: Dict[str, Optional[float]]
    tracking_rms_tail: Dict[str, float]
    max_update_jump: Dict[str, float]
    ordering_ok: Optional[bool] = None


class ComparisonReport(BaseModel):
    """Trigger economy of all strategies on one base scenario"""
    strategies: List[str]
    rows: List[ComparisonRow] = Field(default_factory=list)
    periodic_updates: Optional[List[int]] = None
    switch_split_ok: Optional[bool] = None
    errors: Dict[str, str] = Field(default_factory=dict)
