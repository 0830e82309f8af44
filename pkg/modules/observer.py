"""
State observer, auxiliary-variable disturbance observer and the Hurwitz / Lyapunov diagnostic
"""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence
import logging

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from shared.errors import ConfigError, DivergenceError, NotHurwitzError, ShapeError

logger = logging.getLogger(__name__)

KAPPA_FLOOR = 1.5
RESIDUAL_TOLERANCE = 1e-9


def companion_matrix(q: Sequence[float]) -> np.ndarray:
    """P with first column −q and ones on the superdiagonal"""
    q = np.asarray(q, dtype=float).reshape(-1)
    n = q.size
    P = np.eye(n, k=1)
    P[:, 0] = -q
    return P


def is_hurwitz(P: np.ndarray) -> bool:
    """All eigenvalues strictly in the open left half-plane"""
    eigenvalues = np.linalg.eigvals(np.asarray(P, dtype=float))
    return bool(np.all(np.isfinite(eigenvalues)) and np.all(eigenvalues.real < 0.0))


@dataclass(frozen=True)
class ObserverGains:
    """q_k, κ_l and the companion matrix P built from q"""
    q: np.ndarray
    kappa: np.ndarray
    P: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1)
        kappa = np.array(self.kappa, dtype=float).reshape(-1)
        if q.size < 1 or kappa.shape != q.shape:
            raise ShapeError(f"q has {q.size} levels but kappa has {kappa.size}")
        P = companion_matrix(q)
        if not is_hurwitz(P):
            raise NotHurwitzError(f"observer matrix is not Hurwitz for q={q.tolist()}")
        if np.any(kappa <= KAPPA_FLOOR):
            raise ConfigError("observer.kappa", f"κ > 3/2 required, got {kappa.tolist()}")
        for arr in (q, kappa, P):
            arr.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "P", P)

    @property
    def order(self) -> int:
        return self.q.size


@dataclass
class ObserverState:
    """x̂ and τ̂ of one follower; ϖ̂ is always derived"""
    x_hat: np.ndarray
    tau_hat: np.ndarray

    def varpi_hat(self, gains: ObserverGains) -> np.ndarray:
        """ϖ̂_l = τ̂_l + κ_l x̂_l"""
        return self.tau_hat + gains.kappa * self.x_hat

    def psi(self, x: np.ndarray) -> np.ndarray:
        """Observation error x − x̂"""
        return np.asarray(x, dtype=float) - self.x_hat


def _check(gains: ObserverGains, obs: ObserverState, rbf_outputs) -> np.ndarray:
    n = gains.order
    f_hat = np.asarray(rbf_outputs, dtype=float)
    if obs.x_hat.shape != (n,) or obs.tau_hat.shape != (n,) or f_hat.shape != (n,):
        raise ShapeError(f"observer expects {n} levels")
    if not (np.all(np.isfinite(obs.x_hat)) and np.all(np.isfinite(obs.tau_hat))
            and np.all(np.isfinite(f_hat))):
        raise DivergenceError("non-finite observer input")
    return f_hat


def observer_rates(q: np.ndarray, kappa: np.ndarray, x_hat: np.ndarray, tau_hat: np.ndarray,
                   f_hat: np.ndarray, y, u) -> np.ndarray:
    """Observer rates for stacked rows: x_hat, tau_hat and f_hat are (..., n), y and u (...)"""
    psi1 = np.asarray(y, dtype=float) - x_hat[..., 0]
    chain = np.concatenate([x_hat[..., 1:], np.asarray(u, dtype=float)[..., None]], axis=-1)
    return chain + f_hat + q * psi1[..., None] + tau_hat + kappa * x_hat


def disturbance_observer_rates(kappa: np.ndarray, x_hat: np.ndarray, tau_hat: np.ndarray,
                               f_hat: np.ndarray, u, x_hat_next: Optional[np.ndarray] = None) -> np.ndarray:
    """τ̂ rates for stacked rows; x_hat_next defaults to x̂_2..x̂_n"""
    upper = x_hat[..., 1:] if x_hat_next is None else x_hat_next
    nxt = np.concatenate([upper, np.asarray(u, dtype=float)[..., None]], axis=-1)
    return -kappa * (f_hat + tau_hat + kappa * x_hat + nxt)


def observer_derivative(gains: ObserverGains, obs: ObserverState, y: float, u: float,
                        rbf_outputs: Sequence[float]) -> np.ndarray:
    """x̂̇_k = x̂_{k+1} + f̂_k + q_k ψ_1 + ϖ̂_k, with x̂_{n+1} replaced by u"""
    f_hat = _check(gains, obs, rbf_outputs)
    if not (np.isfinite(y) and np.isfinite(u)):
        raise DivergenceError("non-finite output or control")
    return observer_rates(gains.q, gains.kappa, obs.x_hat, obs.tau_hat, f_hat, y, u)


def disturbance_observer_derivative(gains: ObserverGains, obs: ObserverState,
                                    rbf_outputs: Sequence[float],
                                    x_hat_next: Optional[Sequence[float]], u: float) -> np.ndarray:
    """τ̂̇_l = −κ_l (f̂_l + τ̂_l + κ_l x̂_l + x̂_{l+1}), with x̂_{n+1} replaced by u

    x_hat_next carries x̂_2..x̂_n; None reads them from obs.
    """
    f_hat = _check(gains, obs, rbf_outputs)
    upper = obs.x_hat[1:] if x_hat_next is None else np.asarray(x_hat_next, dtype=float)
    if upper.shape != (gains.order - 1,):
        raise ShapeError(f"x_hat_next needs {gains.order - 1} entries, got {upper.size}")
    if not np.isfinite(u):
        raise DivergenceError("non-finite control")
    return disturbance_observer_rates(gains.kappa, obs.x_hat, obs.tau_hat, f_hat, u, upper)


# ============================================================================
# Lyapunov diagnostic
# ============================================================================

def lyapunov_diagnostic(P: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Solve PᵀF + FP = −2H for symmetric positive-definite F"""
    P = np.asarray(P, dtype=float)
    H = np.asarray(H, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or H.shape != P.shape:
        raise ShapeError(f"P {P.shape} and H {H.shape} must be equal square matrices")
    if not np.allclose(H, H.T) or np.any(np.linalg.eigvalsh(H) <= 0.0):
        raise ShapeError("H must be symmetric positive definite")
    if not is_hurwitz(P):
        raise NotHurwitzError("Lyapunov equation has no positive-definite solution: P is not Hurwitz")

    F = solve_continuous_lyapunov(P.T, -2.0 * H)
    F = 0.5 * (F + F.T)
    residual = lyapunov_residual(P, H, F)
    if residual >= RESIDUAL_TOLERANCE:
        logger.warning(f"Lyapunov residual {residual:.3e} is above tolerance")
    return F


def lyapunov_residual(P: np.ndarray, H: np.ndarray, F: np.ndarray) -> float:
    """‖PᵀF + FP + 2H‖_max"""
    return float(np.abs(P.T @ F + F @ P + 2.0 * H).max())


@dataclass
class ObserverDiagnostic:
    """Outcome of the offline Hurwitz / Lyapunov check for one gain vector"""
    q: List[float]
    hurwitz: bool
    p_eigenvalues: np.ndarray
    f_eigenvalues: Optional[np.ndarray] = None
    residual: Optional[float] = None
    F: Optional[np.ndarray] = None

    @property
    def passed(self) -> bool:
        return (self.hurwitz and self.f_eigenvalues is not None
                and bool(np.all(self.f_eigenvalues > 0.0))
                and self.residual is not None and self.residual < RESIDUAL_TOLERANCE)


def diagnose_observer(q: Sequence[float], H: Optional[np.ndarray] = None) -> ObserverDiagnostic:
    """Hurwitz check of P(q) and, when it passes, the Lyapunov solve with H (identity by default)"""
    P = companion_matrix(q)
    report = ObserverDiagnostic(q=[float(v) for v in q], hurwitz=is_hurwitz(P),
                                p_eigenvalues=np.linalg.eigvals(P))
    if not report.hurwitz:
        logger.info(f"✗ P is not Hurwitz for q={report.q}")
        return report
    H = np.eye(P.shape[0]) if H is None else np.asarray(H, dtype=float)
    F = lyapunov_diagnostic(P, H)
    report.F = F
    report.f_eigenvalues = np.linalg.eigvalsh(F)
    report.residual = lyapunov_residual(P, H, F)
    logger.info(f"✓ Lyapunov solve for q={report.q}: residual {report.residual:.3e}")
    return report
