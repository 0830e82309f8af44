"""
Follower Agent - plant, observers, adaptive networks and backstepping controller of one node
"""
from dataclasses import dataclass
from typing import Dict, List, Tuple
import logging

import numpy as np

from modules.controller import filter_derivative, first_law, rate_feedforward, step_law, theta_rates
from modules.observer import ObserverState, disturbance_observer_rates, observer_rates
from modules.plant import plant_terms
from modules.rbf import RbfBank, leakage_rate
from modules.scenario import Scenario
from shared.errors import DivergenceError, ShapeError
from .base_agent import BaseAgent

logger = logging.getLogger(__name__)

ARITHMETIC_FAILURES = (ArithmeticError, ValueError)


@dataclass(frozen=True)
class StateColumns:
    """Where each signal sits inside a follower's slice"""
    x: slice
    x_hat: slice
    tau_hat: slice
    weights: Tuple[slice, ...]
    alpha_bar: slice
    theta: int


@dataclass
class NetworkTerms:
    """Algebraic signals of every follower at one instant; row a belongs to follower a"""
    z: np.ndarray
    alphas: np.ndarray
    basis_sq: np.ndarray
    obs_phis: List[np.ndarray]
    f_hat: np.ndarray
    psi1: np.ndarray
    psi_norm: np.ndarray
    varpi_hat: np.ndarray

    @property
    def alpha_final(self) -> np.ndarray:
        """α_{n+1} per follower, the control law fed to the trigger"""
        return self.alphas[:, -1]

    @property
    def z_n(self) -> np.ndarray:
        return self.z[:, -1]


class FollowerAgent(BaseAgent):
    """Follower i; its state slice is [x, x̂, τ̂, Ŵ_1..Ŵ_n, ᾱ_2..ᾱ_n, Θ̂]"""

    def __init__(self, index: int, scenario: Scenario):
        self.index = index
        self.scenario = scenario
        self.order = n = scenario.order
        self.neighbors = scenario.topology.neighbors[index]

        offset = 3 * n
        weights = []
        for layout in scenario.observer_layouts[index]:
            weights.append(slice(offset, offset + layout.node_count))
            offset += layout.node_count
        self.columns = StateColumns(
            x=slice(0, n),
            x_hat=slice(n, 2 * n),
            tau_hat=slice(2 * n, 3 * n),
            weights=tuple(weights),
            alpha_bar=slice(offset, offset + n - 1),
            theta=offset + n - 1,
        )
        self._size = offset + n

        super().__init__(
            agent_id=f"follower_{index + 1}",
            agent_type="follower",
            capabilities=["initial_state", "observer_state"],
        )

    def _register_handlers(self):
        self.register_handler("initial_state", self.initial_state)
        self.register_handler("observer_state", self.observer_state)

    @property
    def state_size(self) -> int:
        return self._size

    def initial_state(self) -> np.ndarray:
        """x(0), x̂(0) from the scenario and τ̂(0) = −κx̂(0), so ϖ̂(0) = 0

        Ŵ and Θ̂ start at zero; ᾱ is set by the first evaluation.
        """
        cols = self.columns
        x_hat = np.asarray(self.scenario.initial_estimate[self.index], dtype=float)
        local = np.zeros(self._size)
        local[cols.x] = self.scenario.initial_state[self.index]
        local[cols.x_hat] = x_hat
        local[cols.tau_hat] = -self.scenario.observer_gains.kappa * x_hat
        return local

    def observer_state(self, local: np.ndarray) -> ObserverState:
        return ObserverState(x_hat=local[self.columns.x_hat], tau_hat=local[self.columns.tau_hat])


@dataclass(frozen=True)
class _NeighborGroup:
    """Followers sharing a neighbor count, so their controller inputs stack"""
    rows: np.ndarray
    neighbors: np.ndarray
    banks: Tuple[RbfBank, ...]


class FollowerNetwork:
    """All followers evaluated together on an (N, S) block of their stacked slices"""

    def __init__(self, scenario: Scenario, followers: List[FollowerAgent]):
        sizes = {f.state_size for f in followers}
        if len(sizes) != 1:
            raise ShapeError(f"followers need equal state slices to stack, got sizes {sorted(sizes)}")
        self.scenario = scenario
        self.order = scenario.order
        self.n_followers = len(followers)
        self.columns = followers[0].columns
        self.slice_size = sizes.pop()

        topo = scenario.topology
        self.gain = topo.in_degree + topo.pinning
        self.observer_banks = tuple(
            RbfBank.stack([scenario.observer_layouts[i][level] for i in range(self.n_followers)])
            for level in range(self.order)
        )
        by_count: Dict[int, List[int]] = {}
        for i in range(self.n_followers):
            by_count.setdefault(len(topo.neighbors[i]), []).append(i)
        self.groups = []
        for count, rows in sorted(by_count.items()):
            self.groups.append(_NeighborGroup(
                rows=np.array(rows, dtype=int),
                neighbors=np.array([topo.neighbors[i] for i in rows], dtype=int).reshape(len(rows), count),
                banks=tuple(
                    RbfBank.stack([scenario.controller_layouts[i][k] for i in rows])
                    for k in range(self.order)
                ),
            ))
        logger.debug(f"Stacked {self.n_followers} followers into {len(self.groups)} neighbor groups")

    def block(self, follower_state: np.ndarray) -> np.ndarray:
        """(N, S) view of the concatenated follower slices"""
        return follower_state.reshape(self.n_followers, self.slice_size)

    def _nn_inputs(self, group: _NeighborGroup, k: int, y_r: float, y_r_dot: float,
                   theta: np.ndarray, x_hat: np.ndarray, varpi_hat: np.ndarray) -> np.ndarray:
        """T_k rows laid out as assemble_nn_input does"""
        rows, nbr = group.rows, group.neighbors
        g = rows.size
        second = np.full(g, y_r_dot) if k == 1 else theta[rows]
        return np.hstack([
            np.full((g, 1), y_r), second[:, None],
            x_hat[rows, :k], x_hat[nbr, :k].reshape(g, -1),
            varpi_hat[rows, :k], varpi_hat[nbr, :k].reshape(g, -1),
        ])

    def evaluate(self, t: float, block: np.ndarray, y_r: float, y_r_dot: float,
                 u: np.ndarray, initialize: bool = False) -> NetworkTerms:
        """Consensus / surface errors and virtual controls; initialize sets ᾱ_k = α_k in place"""
        sc = self.scenario
        gains = sc.controller_gains
        obs_gains = sc.observer_gains
        cols = self.columns
        n = self.order

        x = block[:, cols.x]
        x_hat = block[:, cols.x_hat]
        varpi_hat = block[:, cols.tau_hat] + obs_gains.kappa * x_hat
        alpha_bar = block[:, cols.alpha_bar]
        theta = block[:, cols.theta]

        obs_phis = [bank.basis(x_hat[:, :level + 1]) for level, bank in enumerate(self.observer_banks)]
        f_hat = np.column_stack([
            np.einsum("ai,ai->a", block[:, s], phi) for s, phi in zip(cols.weights, obs_phis)
        ])
        psi = x - x_hat
        y = x[:, 0]

        if gains.compensate:
            upper = x_hat[:, 1] if n > 1 else u
            estimated_rates = upper + f_hat[:, 0] + varpi_hat[:, 0]
            feedforward = rate_feedforward(sc.topology, estimated_rates, y_r_dot, f_hat, varpi_hat)
        else:
            feedforward = np.zeros((self.n_followers, n))

        z = np.empty((self.n_followers, n))
        alphas = np.empty((self.n_followers, n))
        basis_sq = np.empty((self.n_followers, n))
        z[:, 0] = sc.topology.laplacian @ y + sc.topology.pinning * (y - y_r)
        for k in range(1, n + 1):
            for group in self.groups:
                E = group.banks[k - 1].basis(self._nn_inputs(group, k, y_r, y_r_dot, theta, x_hat, varpi_hat))
                basis_sq[group.rows, k - 1] = np.einsum("ai,ai->a", E, E)
            if k == 1:
                alphas[:, 0] = first_law(gains, self.gain, z[:, 0], theta, basis_sq[:, 0], feedforward[:, 0])
                continue
            if initialize:
                alpha_bar[:, k - 2] = alphas[:, k - 2]
            z[:, k - 1] = x_hat[:, k - 1] - alpha_bar[:, k - 2]
            alphas[:, k - 1] = step_law(
                gains, k, z[:, k - 1], theta, basis_sq[:, k - 1],
                alphas[:, k - 2], alpha_bar[:, k - 2], psi[:, 0], obs_gains.q[k - 1], feedforward[:, k - 1],
            )

        self._check_rows(t, alphas, "non-finite virtual control")
        return NetworkTerms(
            z=z, alphas=alphas, basis_sq=basis_sq, obs_phis=obs_phis, f_hat=f_hat,
            psi1=psi[:, 0], psi_norm=np.linalg.norm(psi, axis=1), varpi_hat=varpi_hat,
        )

    def _plant(self, t: float, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        drift = np.empty_like(x)
        dist = np.empty_like(x)
        for i in range(self.n_followers):
            try:
                drift[i], dist[i] = plant_terms(self.scenario.plant, x[i], t)
            except DivergenceError as e:
                raise DivergenceError(e.reason, time=t, agent=i, level=e.level) from e
            except ARITHMETIC_FAILURES as e:
                raise DivergenceError(f"arithmetic failure: {e}", time=t, agent=i) from e
        return drift, dist

    def derivative(self, t: float, block: np.ndarray, terms: NetworkTerms, u: np.ndarray) -> np.ndarray:
        """Time derivative of the (N, S) block with every control held"""
        gains = self.scenario.controller_gains
        obs_gains = self.scenario.observer_gains
        cols = self.columns
        n = self.order

        x = block[:, cols.x]
        x_hat = block[:, cols.x_hat]
        tau_hat = block[:, cols.tau_hat]
        drift, dist = self._plant(t, x)

        rates = np.empty_like(block)
        rates[:, cols.x] = np.column_stack([x[:, 1:], u]) + drift + dist
        rates[:, cols.x_hat] = observer_rates(obs_gains.q, obs_gains.kappa, x_hat, tau_hat, terms.f_hat, x[:, 0], u)
        rates[:, cols.tau_hat] = disturbance_observer_rates(obs_gains.kappa, x_hat, tau_hat, terms.f_hat, u)

        # τ̃ uses the simulator's ground-truth disturbance
        tau_tilde = dist - obs_gains.kappa * x - tau_hat
        for level, s in enumerate(cols.weights):
            rates[:, s] = leakage_rate(block[:, s], terms.obs_phis[level], tau_tilde[:, level],
                                       gains.h[level], gains.eta[level], obs_gains.kappa[level])

        rates[:, cols.alpha_bar] = filter_derivative(gains.m, block[:, cols.alpha_bar], terms.alphas[:, :n - 1])
        rates[:, cols.theta] = theta_rates(gains, block[:, cols.theta], terms.z, terms.basis_sq)
        self._check_rows(t, rates, "non-finite rate")
        return rates

    def _check_rows(self, t: float, values: np.ndarray, reason: str):
        bad = ~np.all(np.isfinite(values), axis=1)
        if np.any(bad):
            raise DivergenceError(reason, time=t, agent=int(np.flatnonzero(bad)[0]))
