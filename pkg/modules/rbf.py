"""
Gaussian RBF networks and the leakage-type adaptive weight law
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union
import itertools
import logging

import numpy as np
from scipy.stats import qmc

from shared.errors import ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RbfLayout:
    """Node centers (node_count × input_dim) and widths b_j"""
    centers: np.ndarray
    widths: np.ndarray
    _inv_width_sq: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        centers = np.atleast_2d(np.array(self.centers, dtype=float))
        widths = np.array(self.widths, dtype=float).reshape(-1)
        if centers.shape[0] < 1:
            raise ShapeError("layout needs at least one node")
        if widths.shape[0] != centers.shape[0]:
            raise ShapeError(f"{widths.shape[0]} widths for {centers.shape[0]} centers")
        if not np.all(np.isfinite(centers)):
            raise ShapeError("centers must be finite")
        if not np.all(widths > 0.0):
            raise ShapeError("widths must be strictly positive")
        centers.setflags(write=False)
        widths.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "_inv_width_sq", 1.0 / widths ** 2)

    @property
    def input_dim(self) -> int:
        return self.centers.shape[1]

    @property
    def node_count(self) -> int:
        return self.centers.shape[0]


@dataclass
class AdaptiveWeights:
    """Ŵ of one network"""
    w_hat: np.ndarray

    @classmethod
    def zeros(cls, layout: RbfLayout) -> "AdaptiveWeights":
        return cls(w_hat=np.zeros(layout.node_count))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.w_hat))


WeightsLike = Union[AdaptiveWeights, np.ndarray]


def _weights(weights: WeightsLike) -> np.ndarray:
    return weights.w_hat if isinstance(weights, AdaptiveWeights) else np.asarray(weights, dtype=float)


def basis(layout: RbfLayout, input: Sequence[float]) -> np.ndarray:
    """E_j(x) = exp(−‖x − c_j‖² / b_j²)"""
    x = np.asarray(input, dtype=float)
    if x.shape != (layout.input_dim,):
        raise ShapeError(f"input of shape {x.shape} for a {layout.input_dim}-d layout")
    diff = layout.centers - x
    return np.exp(-np.einsum("ij,ij->i", diff, diff) * layout._inv_width_sq)


@dataclass(frozen=True)
class RbfBank:
    """Layouts of one network per agent, stacked for batch evaluation

    Every layout must have the same node count and input dimension.
    """
    centers: np.ndarray
    inv_width_sq: np.ndarray

    @classmethod
    def stack(cls, layouts: Sequence[RbfLayout]) -> "RbfBank":
        shapes = {layout.centers.shape for layout in layouts}
        if len(shapes) != 1:
            raise ShapeError(f"cannot stack layouts of shapes {sorted(shapes)}")
        centers = np.stack([layout.centers for layout in layouts])
        inv = np.stack([layout._inv_width_sq for layout in layouts])
        centers.setflags(write=False)
        inv.setflags(write=False)
        return cls(centers=centers, inv_width_sq=inv)

    @property
    def node_count(self) -> int:
        return self.centers.shape[1]

    def basis(self, inputs: np.ndarray) -> np.ndarray:
        """Row a of the result is E(inputs[a]) under layout a"""
        diff = self.centers - inputs[:, None, :]
        return np.exp(-np.einsum("aij,aij->ai", diff, diff) * self.inv_width_sq)


def approximate(layout: RbfLayout, weights: WeightsLike, input: Sequence[float],
                phi: Optional[np.ndarray] = None) -> float:
    """ŴᵀE(x); pass phi to reuse an already evaluated basis"""
    w = _weights(weights)
    if w.shape != (layout.node_count,):
        raise ShapeError(f"{w.size} weights for {layout.node_count} nodes")
    if phi is None:
        phi = basis(layout, input)
    return float(w @ phi)


def weight_update_rate(weights: WeightsLike, layout: RbfLayout, x_hat_prefix: Sequence[float],
                       tau_tilde: float, h: float, eta: float, kappa: float,
                       phi: Optional[np.ndarray] = None) -> np.ndarray:
    """Ŵ̇ = −hŴ − η τ̃ κ E(x̂̄)"""
    w = _weights(weights)
    if w.shape != (layout.node_count,):
        raise ShapeError(f"{w.size} weights for {layout.node_count} nodes")
    if phi is None:
        phi = basis(layout, x_hat_prefix)
    return leakage_rate(w, phi, tau_tilde, h, eta, kappa)


def leakage_rate(w: np.ndarray, phi: np.ndarray, tau_tilde, h: float, eta: float, kappa: float) -> np.ndarray:
    """−hŴ − ητ̃κE; with stacked rows, tau_tilde holds one value per row"""
    drive = eta * kappa * np.asarray(tau_tilde, dtype=float)
    return -h * w - drive[..., None] * phi


# ============================================================================
# Layout factories
# ============================================================================

def grid_layout(input_dim: int, span: Tuple[float, float], nodes_per_axis: int) -> RbfLayout:
    """Regular grid of centers, width = grid spacing"""
    lo, hi = span
    axis = np.linspace(lo, hi, nodes_per_axis)
    spacing = (hi - lo) / (nodes_per_axis - 1) if nodes_per_axis > 1 else (hi - lo)
    centers = np.array(list(itertools.product(axis, repeat=input_dim)), dtype=float)
    return RbfLayout(centers=centers, widths=np.full(centers.shape[0], spacing))


def scattered_layout(input_dim: int, span: Tuple[float, float], node_count: int,
                     width: float, seed: Sequence[int]) -> RbfLayout:
    """Scrambled Halton centers over span^d, seeded deterministically"""
    sampler = qmc.Halton(d=input_dim, scramble=True, seed=np.random.default_rng(list(seed)))
    unit = sampler.random(n=node_count)
    lo, hi = span
    centers = qmc.scale(unit, [lo] * input_dim, [hi] * input_dim)
    return RbfLayout(centers=centers, widths=np.full(node_count, width))


def default_layout(input_dim: int, settings, seed: Sequence[int]) -> RbfLayout:
    """11-node grid in 1-d, 5×5 grid in 2-d, scattered Halton nodes above"""
    span = tuple(settings.span)
    if input_dim == 1:
        return grid_layout(1, span, settings.nodes_1d)
    if input_dim == 2:
        return grid_layout(2, span, settings.nodes_per_axis_2d)
    return scattered_layout(input_dim, span, settings.scattered_nodes,
                            settings.scattered_width, seed)
