"""
Sampled closed-loop signals and their tabular (CSV) layout
"""
from dataclasses import dataclass, field, fields, replace
from typing import List, Optional
import logging

import numpy as np
import pandas as pd

from shared.schema import RunMetrics, TriggerEvent

logger = logging.getLogger(__name__)


@dataclass
class TrajectoryLog:
    """Series indexed [sample, follower(, level)]

    alpha holds α_2..α_{n+1} and alpha_bar holds ᾱ_2..ᾱ_n.
    """
    time: np.ndarray
    x: np.ndarray
    x_hat: np.ndarray
    tau_hat: np.ndarray
    varpi_hat: np.ndarray
    z: np.ndarray
    u: np.ndarray
    w: np.ndarray
    theta: np.ndarray
    w_norm: np.ndarray
    psi_norm: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray
    events: List[TriggerEvent] = field(default_factory=list)
    metrics: Optional[RunMetrics] = None

    @classmethod
    def allocate(cls, samples: int, n_followers: int, order: int) -> "TrajectoryLog":
        full = (samples, n_followers, order)
        flat = (samples, n_followers)
        return cls(
            time=np.zeros(samples),
            x=np.zeros(full), x_hat=np.zeros(full), tau_hat=np.zeros(full),
            varpi_hat=np.zeros(full), z=np.zeros(full),
            u=np.zeros(flat), w=np.zeros(flat), theta=np.zeros(flat),
            w_norm=np.zeros(full), psi_norm=np.zeros(flat),
            alpha=np.zeros(full), alpha_bar=np.zeros((samples, n_followers, order - 1)),
        )

    def _series(self):
        return [f.name for f in fields(self) if f.name not in ("events", "metrics")]

    def truncated(self, samples: int) -> "TrajectoryLog":
        """First `samples` rows, used when a run stops early"""
        return replace(self, **{name: getattr(self, name)[:samples] for name in self._series()})

    def sampled(self, stride: int) -> "TrajectoryLog":
        """Every stride-th row; the event log is kept whole"""
        if stride == 1:
            return self
        return replace(self, **{name: getattr(self, name)[::stride].copy() for name in self._series()})

    @property
    def n_samples(self) -> int:
        return self.time.shape[0]

    @property
    def n_followers(self) -> int:
        return self.x.shape[1]

    @property
    def order(self) -> int:
        return self.x.shape[2]

    def boundary_layer_errors(self) -> np.ndarray:
        """e_k = ᾱ_k − α_k for k = 2..n"""
        return self.alpha_bar - self.alpha[:, :, :-1]

    def events_for(self, agent: int) -> List[TriggerEvent]:
        """Events of the 0-based follower index"""
        return [e for e in self.events if e.agent == agent + 1]

    # ========================================================================
    # Tabular layout
    # ========================================================================

    def column_names(self) -> List[str]:
        n = self.order
        names = ["time"]
        for i in range(1, self.n_followers + 1):
            names += [f"x_{i}_{k}" for k in range(1, n + 1)]
            names += [f"xhat_{i}_{k}" for k in range(1, n + 1)]
            names += [f"varpihat_{i}_{k}" for k in range(1, n + 1)]
            names += [f"z_{i}_{k}" for k in range(1, n + 1)]
            names += [f"u_{i}", f"w_{i}", f"theta_{i}"]
            names += [f"wnorm_{i}_{k}" for k in range(1, n + 1)]
        return names

    def to_frame(self) -> pd.DataFrame:
        blocks = [self.time[:, None]]
        for i in range(self.n_followers):
            blocks += [self.x[:, i], self.x_hat[:, i], self.varpi_hat[:, i], self.z[:, i],
                       self.u[:, i, None], self.w[:, i, None], self.theta[:, i, None],
                       self.w_norm[:, i]]
        return pd.DataFrame(np.hstack(blocks), columns=self.column_names())

    def events_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(e.time, e.agent, e.branch.value, e.u) for e in self.events],
            columns=["time", "agent", "branch", "u"],
        )
