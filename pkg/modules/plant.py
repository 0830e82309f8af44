"""
Follower dynamics in semi-strict-feedback form, disturbances and the leader reference
"""
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple
import logging
import math
import re

import numpy as np
import sympy as sy
from sympy.parsing.sympy_parser import parse_expr

from shared.errors import ConfigError, DivergenceError, ShapeError

logger = logging.getLogger(__name__)

DriftFn = Callable[[np.ndarray], float]
DisturbanceFn = Callable[[np.ndarray, float], float]

ALLOWED_FUNCTIONS = {"sin": sy.sin, "cos": sy.cos, "exp": sy.exp}
_IDENTIFIER = re.compile(r"\b[A-Za-z_][A-Za-z_0-9]*")
_ALLOWED_CHARS = re.compile(r"^[\w\s\.\+\-\*/\(\)]*$")


@dataclass
class AgentPlantState:
    """True states x̄_{i,n} of one follower"""
    x: np.ndarray

    @property
    def output(self) -> float:
        return float(self.x[0])


@dataclass(frozen=True)
class PlantDynamics:
    """ẋ_k = x_{k+1} + f_k(x̄_k) + ξ_k(x, t), ẋ_n = u + f_n(x̄_n) + ξ_n(x, t)

    Drift functions receive the full state vector; expression plants are checked
    to read only x_1..x_k at level k.
    """
    order: int
    drift: Tuple[DriftFn, ...]
    disturbance: Tuple[DisturbanceFn, ...]
    label: str = "custom"

    def __post_init__(self):
        if self.order < 1:
            raise ShapeError("plant order must be positive")
        if len(self.drift) != self.order or len(self.disturbance) != self.order:
            raise ShapeError("one drift and one disturbance function per level required")


@dataclass(frozen=True)
class ReferenceSignal:
    """Leader output y_r(t) with its analytic derivative"""
    value: Callable[[float], float]
    derivative: Callable[[float], float]
    label: str = "custom"

    def y_r(self, t: float) -> float:
        return float(self.value(t))

    def y_r_dot(self, t: float) -> float:
        return float(self.derivative(t))


def plant_terms(dyn: PlantDynamics, x: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """f_k(x̄_k) and ξ_k(x, t) for every level"""
    if x.shape != (dyn.order,):
        raise ShapeError(f"state has shape {x.shape}, plant order is {dyn.order}")
    drift = np.empty(dyn.order)
    dist = np.empty(dyn.order)
    for k in range(dyn.order):
        drift[k] = dyn.drift[k](x)
        dist[k] = dyn.disturbance[k](x, t)
        if not (math.isfinite(drift[k]) and math.isfinite(dist[k])):
            raise DivergenceError("non-finite drift or disturbance", time=t, level=k)
    return drift, dist


def plant_derivative(dyn: PlantDynamics, state: AgentPlantState, u: float, t: float) -> np.ndarray:
    """Right-hand side of the follower dynamics with input u"""
    drift, dist = plant_terms(dyn, state.x, t)
    chain = np.append(state.x[1:], u)
    return chain + drift + dist


def benchmark_dynamics() -> PlantDynamics:
    """Second-order benchmark follower"""

    # f_1 reads x_2 as published, so the benchmark is not strictly semi-strict-feedback
    def f1(x):
        return 0.8 * x[0] * math.exp(-1.4 * x[1] ** 2)

    def f2(x):
        return -0.5 * x[0] ** 2 * math.cos(x[1])

    def xi1(x, t):
        return 0.8 * x[0] * math.sin(x[1]) * math.cos(t) ** 2

    def xi2(x, t):
        return 0.2 * x[1] * math.cos(x[0]) * math.cos(t) ** 2

    return PlantDynamics(order=2, drift=(f1, f2), disturbance=(xi1, xi2), label="benchmark")


def benchmark_reference() -> ReferenceSignal:
    """y_r = −0.5 sin(4t) cos(2t)"""
    return ReferenceSignal(
        value=lambda t: -0.5 * math.sin(4 * t) * math.cos(2 * t),
        derivative=lambda t: -2.0 * math.cos(4 * t) * math.cos(2 * t) + math.sin(4 * t) * math.sin(2 * t),
        label="benchmark",
    )


# ============================================================================
# Expression-defined dynamics
# ============================================================================

def _parse(text: str, symbols: dict, field_path: str) -> sy.Expr:
    """Parse a whitelisted closed-form expression"""
    if not _ALLOWED_CHARS.match(text) or "__" in text:
        raise ConfigError(field_path, f"illegal characters in expression {text!r}")
    for name in _IDENTIFIER.findall(text):
        if name not in symbols and name not in ALLOWED_FUNCTIONS:
            raise ConfigError(field_path, f"unknown name {name!r} (allowed: sin, cos, exp, "
                                          f"{', '.join(sorted(symbols))})")
    global_dict = {"Integer": sy.Integer, "Float": sy.Float, "Rational": sy.Rational,
                   "Symbol": sy.Symbol, **ALLOWED_FUNCTIONS}
    try:
        return parse_expr(text, local_dict=dict(symbols), global_dict=global_dict)
    except (SyntaxError, TypeError, ValueError, sy.SympifyError) as e:
        raise ConfigError(field_path, f"cannot parse {text!r}: {e}")


def expression_dynamics(drift: Sequence[str], disturbance: Sequence[str]) -> PlantDynamics:
    """Compile drift (in x1..xk) and disturbance (in x1..xn, t) strings into a plant"""
    order = len(drift)
    if len(disturbance) != order:
        raise ConfigError("plant.disturbance", "one disturbance expression per level required")
    xs = sy.symbols(" ".join(f"x{k + 1}" for k in range(order)) + " t")
    state_syms, t_sym = list(xs[:order]), xs[order]
    names = {str(s): s for s in state_syms}
    names["t"] = t_sym

    drift_fns, dist_fns = [], []
    for k, text in enumerate(drift):
        expr = _parse(text, names, f"plant.drift[{k}]")
        allowed = set(state_syms[:k + 1])
        if not expr.free_symbols <= allowed:
            extra = sorted(str(s) for s in expr.free_symbols - allowed)
            raise ConfigError(f"plant.drift[{k}]",
                              f"f_{k + 1} may depend on x1..x{k + 1} only, found {extra}")
        fn = sy.lambdify(state_syms[:k + 1], expr, modules="math")
        drift_fns.append(lambda p, fn=fn, k=k: float(fn(*p[:k + 1])))
    for k, text in enumerate(disturbance):
        expr = _parse(text, names, f"plant.disturbance[{k}]")
        fn = sy.lambdify(state_syms + [t_sym], expr, modules="math")
        dist_fns.append(lambda x, t, fn=fn: float(fn(*x, t)))

    label = "expr:" + ";".join(list(drift) + list(disturbance))
    logger.info(f"✓ Compiled order-{order} expression plant")
    return PlantDynamics(order=order, drift=tuple(drift_fns), disturbance=tuple(dist_fns), label=label)


def expression_reference(value: str, derivative: str) -> ReferenceSignal:
    """Compile y_r(t) and ẏ_r(t) strings"""
    t_sym = sy.Symbol("t")
    names = {"t": t_sym}
    value_fn = sy.lambdify([t_sym], _parse(value, names, "reference.value"), modules="math")
    deriv_fn = sy.lambdify([t_sym], _parse(derivative, names, "reference.derivative"), modules="math")
    return ReferenceSignal(
        value=lambda t: float(value_fn(t)),
        derivative=lambda t: float(deriv_fn(t)),
        label=f"expr:{value};{derivative}",
    )
