"""Classical gradient flow ``du/dt = f - K u`` evaluated exactly in the eigenbasis."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SingularityError
from .fem import SpdSystem


@dataclass(frozen=True, eq=False)
class EigenSystem:
    eigenvalues: np.ndarray  # ascending, positive
    eigenvectors: np.ndarray  # orthonormal columns

    @classmethod
    def of(cls, system: SpdSystem) -> "EigenSystem":
        lam, V = system.eig
        return cls(lam, V)


@dataclass(frozen=True, eq=False)
class FlowSolution:
    u_t: np.ndarray
    t: float
    delta_norm: float


def _check_dims(system, u):
    u = np.asarray(u, dtype=float)
    if u.shape != (system.dim,):
        raise ParameterError(f"vector of shape {u.shape} does not match system dim {system.dim}")
    return u


def energy(system: SpdSystem, u) -> float:
    """Quadratic energy ``u^T K u / 2 - u^T f``."""
    u = _check_dims(system, u)
    return float(0.5 * u @ system.matrix @ u - u @ system.load)


def energy_gradient(system: SpdSystem, u) -> np.ndarray:
    u = _check_dims(system, u)
    return system.matrix @ u - system.load


def solve_direct(system: SpdSystem) -> np.ndarray:
    try:
        u = np.linalg.solve(system.matrix, system.load)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(str(exc)) from exc
    res = np.linalg.norm(system.matrix @ u - system.load)
    if res > 1e-10 * max(np.linalg.norm(system.load), 1e-300):
        raise SingularityError(f"direct solve residual {res:.3e} too large")
    return u


def phi1(lam, t):
    """``(1 - exp(-lam t)) / lam``; the series ``t (1 - lam t/2 + (lam t)^2/6)`` below 1e-4."""
    lam = np.asarray(lam, dtype=float)
    y = lam * t
    out = np.empty_like(y)
    small = np.abs(y) < 1e-4
    out[small] = t * (1.0 - y[small] / 2.0 + y[small] ** 2 / 6.0)
    out[~small] = -np.expm1(-y[~small]) / lam[~small]
    return out


def gradient_flow(system: SpdSystem, t: float, u0=None) -> FlowSolution:
    """``u(t) = e^{-Kt} u(0) + K^{-1}(I - e^{-Kt}) f`` via eigendecomposition.

    ``u0`` overrides the system's hot start.
    """
    if t < 0:
        raise ParameterError(f"t must be nonnegative, got {t}")
    lam, V = system.eig
    u0 = system.hot_start if u0 is None else _check_dims(system, u0)
    u_star = V @ ((V.T @ system.load) / lam)
    if t == 0:
        return FlowSolution(u0.copy(), 0.0, float(np.linalg.norm(u0 - u_star)))
    u0_v = V.T @ u0
    f_v = V.T @ system.load
    u_t = V @ (np.exp(-lam * t) * u0_v + phi1(lam, t) * f_v)
    return FlowSolution(u_t, float(t), float(np.linalg.norm(u_t - u_star)))


def error_bound(delta0_norm: float, kappa: float, t: float) -> float:
    """``exp(-t/kappa) * ||delta(0)||``, valid when the spectrum lies in ``[1/kappa, 1]``."""
    return float(np.exp(-t / kappa) * delta0_norm)


def select_time(kappa: float, zeta: float, delta0_norm: float) -> float:
    """Smallest ``t`` the decay bound certifies for ``||delta(t)|| <= zeta``; 0 if already there."""
    if zeta <= 0:
        raise ParameterError("zeta must be positive")
    if zeta >= delta0_norm:
        return 0.0
    return float(-kappa * np.log(zeta / delta0_norm))


def relative_error(u_approx, u_star) -> float:
    u_approx = np.asarray(u_approx)
    u_star = np.asarray(u_star)
    if u_approx.shape != u_star.shape:
        raise ParameterError(f"shape mismatch {u_approx.shape} vs {u_star.shape}")
    ref = np.linalg.norm(u_star)
    if ref == 0:
        raise ParameterError("reference vector has zero norm")
    return float(np.linalg.norm(u_approx - u_star) / ref)
