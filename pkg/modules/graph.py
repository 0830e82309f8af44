"""
Directed follower topology, Laplacian / pinning algebra and the graph consensus error
"""
from dataclasses import dataclass, field
from typing import Sequence, Tuple
import logging

import numpy as np

from shared.errors import (
    AgentIndexError,
    DimensionMismatchError,
    InvalidAdjacencyError,
    IsolatedFollowerError,
    SelfLoopError,
)

logger = logging.getLogger(__name__)


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Topology:
    """Communication graph among followers; row i of the adjacency lists whom i listens to"""
    adjacency: np.ndarray
    pinning: np.ndarray
    in_degree: np.ndarray = field(init=False)
    laplacian: np.ndarray = field(init=False)
    neighbors: Tuple[Tuple[int, ...], ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "adjacency", _frozen(self.adjacency))
        object.__setattr__(self, "pinning", _frozen(self.pinning))
        in_degree = self.adjacency.sum(axis=1)
        object.__setattr__(self, "in_degree", _frozen(in_degree))
        object.__setattr__(self, "laplacian", _frozen(np.diag(in_degree) - self.adjacency))
        object.__setattr__(self, "neighbors", tuple(
            tuple(int(j) for j in np.flatnonzero(row)) for row in self.adjacency
        ))

    @property
    def n_followers(self) -> int:
        return self.adjacency.shape[0]

    @property
    def pinning_matrix(self) -> np.ndarray:
        """ℬ = diag(b_1, ..., b_N)"""
        return np.diag(self.pinning)

    def gain(self, i: int) -> float:
        """d_i + b_i"""
        return float(self.in_degree[i] + self.pinning[i])


def build_topology(adjacency: Sequence[Sequence[float]], pinning: Sequence[float]) -> Topology:
    """Validate the adjacency / pinning pair and derive in-degrees and the Laplacian"""
    adj = np.asarray(adjacency, dtype=float)
    pins = np.asarray(pinning, dtype=float)

    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise DimensionMismatchError(f"adjacency must be square, got shape {adj.shape}")
    if pins.ndim != 1 or pins.shape[0] != adj.shape[0]:
        raise DimensionMismatchError(
            f"pinning has {pins.size} entries for {adj.shape[0]} followers"
        )
    if not np.all((adj == 0.0) | (adj == 1.0)):
        raise InvalidAdjacencyError("adjacency entries must be 0 or 1")
    if np.any(np.diag(adj) != 0.0):
        loops = [int(i) + 1 for i in np.flatnonzero(np.diag(adj))]
        raise SelfLoopError(f"self-loop at follower(s) {loops}")
    if np.any(pins < 0.0) or not np.all(np.isfinite(pins)):
        raise InvalidAdjacencyError("pinning gains must be finite and non-negative")

    reach = adj.sum(axis=1) + pins
    isolated = np.flatnonzero(reach <= 0.0)
    if isolated.size:
        raise IsolatedFollowerError(int(isolated[0]))

    topology = Topology(adjacency=adj, pinning=pins)
    logger.debug(f"Built topology with {topology.n_followers} followers, "
                 f"{int(adj.sum())} edges, {int(np.count_nonzero(pins))} pinned")
    return topology


def consensus_error(topology: Topology, outputs: Sequence[float], reference: float, i: int) -> float:
    """z_{i,1} = Σ_j a_ij (y_i − y_j) + b_i (y_i − y_r)"""
    if not 0 <= i < topology.n_followers:
        raise AgentIndexError(f"follower index {i} out of range 0..{topology.n_followers - 1}")
    y = np.asarray(outputs, dtype=float)
    if y.shape != (topology.n_followers,):
        raise DimensionMismatchError(
            f"expected {topology.n_followers} outputs, got shape {y.shape}"
        )
    row = topology.adjacency[i]
    return float(row @ (y[i] - y) + topology.pinning[i] * (y[i] - reference))
