"""
Adaptive backstepping with dynamic-surface filters: virtual controls, filters and the Θ̂ law
"""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence
import logging

import numpy as np

from modules.graph import Topology
from modules.rbf import AdaptiveWeights
from shared.errors import ConfigError, ShapeError

logger = logging.getLogger(__name__)

FILTER_WARNING_THRESHOLD = 0.1


@dataclass(frozen=True)
class ControllerGains:
    """r_k, c_k, η_k, h_k per level, m_k per filter, λ and o"""
    r: np.ndarray
    c: np.ndarray
    eta: np.ndarray
    h: np.ndarray
    m: np.ndarray
    lam: float
    o: float
    compensate: bool = True

    def __post_init__(self):
        arrays = {}
        for name in ("r", "c", "eta", "h", "m"):
            arr = np.array(getattr(self, name), dtype=float).reshape(-1)
            arr.setflags(write=False)
            arrays[name] = arr
        n = arrays["r"].size
        for name in ("c", "eta", "h"):
            if arrays[name].size != n:
                raise ShapeError(f"controller.{name} has {arrays[name].size} levels, expected {n}")
        if arrays["m"].size != n - 1:
            raise ShapeError(f"controller.m needs {n - 1} filter constants, got {arrays['m'].size}")
        if np.any(arrays["r"] >= 0):
            raise ConfigError("controller.r", "r < 0 required")
        for name in ("c", "eta", "h", "m"):
            if np.any(arrays[name] <= 0):
                raise ConfigError(f"controller.{name}", f"{name} > 0 required")
        if self.lam <= 0 or self.o <= 0:
            raise ConfigError("controller", "λ > 0 and o > 0 required")
        if np.any(arrays["m"] > FILTER_WARNING_THRESHOLD):
            logger.warning(f"Filter constants m={arrays['m'].tolist()} exceed "
                           f"{FILTER_WARNING_THRESHOLD}; boundary-layer errors may grow")
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "o", float(self.o))

    @property
    def order(self) -> int:
        return self.r.size


@dataclass
class ControllerState:
    """Filtered virtual controls ᾱ_2..ᾱ_n, Θ̂ and the observer-network weights"""
    alpha_bar: np.ndarray
    theta_hat: float = 0.0
    w_hats: List[AdaptiveWeights] = field(default_factory=list)

    def boundary_layer_errors(self, alphas: Sequence[float]) -> np.ndarray:
        """e_k = ᾱ_k − α_k for k = 2..n"""
        return boundary_layer_error(self.alpha_bar, alphas)


def boundary_layer_error(alpha_bar: Sequence[float], alpha: Sequence[float]) -> np.ndarray:
    return np.asarray(alpha_bar, dtype=float) - np.asarray(alpha, dtype=float)


def nn_damping(theta_hat, c, z, energy):
    """Θ̂/(2c²) z ‖E‖²; broadcasts over agents"""
    return theta_hat / (2.0 * c * c) * z * energy


def first_law(gains: ControllerGains, gain, z1, theta_hat, energy, feedforward=0.0):
    """α_2 from z_1 and ‖E_1‖²; every argument after gains may be an array over agents"""
    numerator = gains.r[0] * z1 - 0.5 * z1 - nn_damping(theta_hat, gains.c[0], z1, energy)
    return numerator / gain + feedforward


def step_law(gains: ControllerGains, k: int, z_k, theta_hat, energy, alpha_k, alpha_bar_k,
             psi1, q_k, feedforward=0.0):
    """α_{k+1} from z_k and ‖E_k‖²; broadcasts like first_law"""
    level = k - 1
    return (gains.r[level] * z_k - 0.5 * z_k
            + (alpha_k - alpha_bar_k) / gains.m[k - 2]
            - q_k * psi1
            - nn_damping(theta_hat, gains.c[level], z_k, energy)
            + feedforward)


def virtual_control_1(gains: ControllerGains, topo: Topology, i: int, z1: float,
                      theta_hat: float, basis_T1: Sequence[float], feedforward: float = 0.0) -> float:
    """α_2 = (r_1 z_1 − z_1/2 − Θ̂/(2c_1²) z_1 ‖E_1‖²) / (d_i + b_i) + feedforward"""
    basis_T1 = np.asarray(basis_T1, dtype=float)
    return float(first_law(gains, topo.gain(i), z1, theta_hat, float(basis_T1 @ basis_T1), feedforward))


def virtual_control_k(gains: ControllerGains, k: int, z_k: float, theta_hat: float,
                      basis_Tk: Sequence[float], alpha_k: float, alpha_bar_k: float,
                      psi1: float, q_k: float, feedforward: float = 0.0) -> float:
    """α_{k+1} for 2 ≤ k ≤ n; k = n yields the final control law

    α_{k+1} = r_k z_k − z_k/2 + (α_k − ᾱ_k)/m_k − q_k ψ_1 − Θ̂/(2c_k²) z_k ‖E_k‖² + feedforward
    """
    if not 2 <= k <= gains.order:
        raise ShapeError(f"step {k} outside 2..{gains.order}")
    basis_Tk = np.asarray(basis_Tk, dtype=float)
    return float(step_law(gains, k, z_k, theta_hat, float(basis_Tk @ basis_Tk),
                          alpha_k, alpha_bar_k, psi1, q_k, feedforward))


def rate_feedforward(topo: Topology, estimated_rates: np.ndarray, y_r_dot: float,
                     f_hat: np.ndarray, varpi_hat: np.ndarray) -> np.ndarray:
    """Compensation added to α_2..α_{n+1} for every agent, shape (N, n)

    Column 0 is (Σ_j a_ij v_j + b_i ẏ_r)/(d_i + b_i) − f̂_{i,1} − ϖ̂_{i,1}, where v_j is
    neighbor j's estimated output rate; column k is −f̂_{i,k+1} − ϖ̂_{i,k+1}.
    """
    gain = topo.in_degree + topo.pinning
    terms = -(np.asarray(f_hat, dtype=float) + np.asarray(varpi_hat, dtype=float))
    terms[:, 0] += (topo.adjacency @ estimated_rates + topo.pinning * y_r_dot) / gain
    return terms


def filter_derivative(m_k: float, alpha_bar_k: float, alpha_k: float) -> float:
    """m ᾱ̇ + ᾱ = α"""
    return (alpha_k - alpha_bar_k) / m_k


def theta_rates(gains: ControllerGains, theta_hat, z: np.ndarray, basis_norms_sq: np.ndarray):
    """Θ̂̇ for stacked rows of z and ‖E_k‖²"""
    return -gains.lam * theta_hat + np.sum(gains.o / (2.0 * gains.c ** 2) * z ** 2 * basis_norms_sq, axis=-1)


def theta_update_rate(gains: ControllerGains, theta_hat: float, z: Sequence[float],
                      basis_norms_sq: Sequence[float]) -> float:
    """Θ̂̇ = −λΘ̂ + Σ_k o/(2c_k²) z_k² ‖E_k‖²"""
    z = np.asarray(z, dtype=float)
    norms = np.asarray(basis_norms_sq, dtype=float)
    if z.shape != (gains.order,) or norms.shape != (gains.order,):
        raise ShapeError(f"expected {gains.order} errors and basis norms")
    return float(theta_rates(gains, theta_hat, z, norms))


def _neighbor_block(values, k: int, label: str) -> np.ndarray:
    block = np.asarray(values, dtype=float)
    if block.size == 0:
        return np.zeros((0, k))
    if block.ndim != 2 or block.shape[1] != k:
        raise ShapeError(f"{label} must be rows of length {k}, got shape {block.shape}")
    return block


def assemble_nn_input(k: int, y_r: float, y_r_dot: float, theta_hat: float,
                      own_x_hat: Sequence[float], neighbor_x_hat,
                      own_varpi_hat: Sequence[float], neighbor_varpi_hat,
                      neighbor_ids: Optional[Sequence[int]] = None) -> np.ndarray:
    """T_k = [y_r, ẏ_r (k = 1) or Θ̂ (k ≥ 2), x̂̄_i, x̂̄_j..., ϖ̂̄_i, ϖ̂̄_j...]

    Neighbor rows are prefixes of length k in ascending agent order.
    """
    if k < 1:
        raise ShapeError("step index starts at 1")
    own_x = np.asarray(own_x_hat, dtype=float)
    own_w = np.asarray(own_varpi_hat, dtype=float)
    if own_x.shape != (k,) or own_w.shape != (k,):
        raise ShapeError(f"own prefixes must have length {k}")
    nbr_x = _neighbor_block(neighbor_x_hat, k, "neighbor_x_hat")
    nbr_w = _neighbor_block(neighbor_varpi_hat, k, "neighbor_varpi_hat")
    if nbr_x.shape[0] != nbr_w.shape[0]:
        raise ShapeError("neighbor x̂ and ϖ̂ blocks disagree on the neighbor count")
    if neighbor_ids is not None:
        ids = list(neighbor_ids)
        if len(ids) != nbr_x.shape[0]:
            raise ShapeError(f"{len(ids)} neighbor ids for {nbr_x.shape[0]} rows")
        if any(b <= a for a, b in zip(ids, ids[1:])):
            raise ShapeError(f"neighbor ids must be strictly ascending, got {ids}")
    second = y_r_dot if k == 1 else theta_hat
    return np.concatenate(([y_r, second], own_x, nbr_x.reshape(-1), own_w, nbr_w.reshape(-1)))


def nn_input_dim(k: int, neighbor_count: int) -> int:
    return 2 + 2 * k * (1 + neighbor_count)
