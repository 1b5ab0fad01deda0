"""Power allocation: equal loading and (robust) gradient-descent MSE minimization.

The conditional MSE is a separable quadratic in the amplitudes d,

    sum_i rho q_ii d_i^2 - 2 sqrt(rho) Re(e_ii) d_i + const,

with E = G_hat^T W and q_ii = ||E[:, i]||^2. The robust variant (RGDPA)
descends this objective; the non-robust one (GDPA) drops the linear term
and descends only the quadratic part.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, NonFiniteIterate, ZeroPower

TRACE_RTOL = 1e-12


@dataclass(frozen=True)
class PaSettings:
    step: float = 0.01
    iterations: int = 100
    d_init: np.ndarray | None = None  # None: equal power loading

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step size must be positive, got {self.step}")
        if self.iterations < 1:
            raise ValueError(f"iteration count must be >= 1, got {self.iterations}")


def epl(W: np.ndarray, P_budget: float) -> np.ndarray:
    n = W.shape[1]
    return np.full(n, np.sqrt(P_budget / n))


def _effective(G_hat_S, W):
    G_hat_S = np.asarray(G_hat_S)
    W = np.asarray(W)
    if G_hat_S.shape != W.shape:
        raise DimensionMismatch(f"G_hat_S {G_hat_S.shape} vs W {W.shape}")
    return G_hat_S.T @ W


def _check_d(d, n):
    d = np.asarray(d, dtype=float)
    if d.shape != (n,):
        raise DimensionMismatch(f"d has shape {d.shape}, expected ({n},)")
    return d


def grad_unconditional(G_hat_S, W, d, rho_f: float) -> np.ndarray:
    """diag(2 rho W^H G^* G^T W diag(d))."""
    E = _effective(G_hat_S, W)
    d = _check_d(d, W.shape[1])
    q = np.sum(np.abs(E) ** 2, axis=0)
    return 2.0 * rho_f * q * d


def grad_conditional(G_hat_S, W, d, rho_f: float) -> np.ndarray:
    """Unconditional gradient minus 2 sqrt(rho) Re diag(W^H G^*)."""
    E = _effective(G_hat_S, W)
    d = _check_d(d, W.shape[1])
    q = np.sum(np.abs(E) ** 2, axis=0)
    return 2.0 * rho_f * q * d - 2.0 * np.sqrt(rho_f) * np.diag(E).real


def safe_step(G_hat_S, W, rho_f: float) -> float:
    """1 / (2 rho lambda_max(Re W^H G^* G^T W)): the descent-safe step bound."""
    E = _effective(G_hat_S, W)
    gram = (E.conj().T @ E).real
    lam_max = float(np.linalg.eigvalsh(0.5 * (gram + gram.T))[-1])
    if lam_max <= 0 or rho_f <= 0:
        return np.inf
    return 1.0 / (2.0 * rho_f * lam_max)


def rescale_power(d, W, P_ref) -> np.ndarray:
    """Scale d so that Tr(W diag(d^2) W^H) matches Tr(P_ref P_ref^H)."""
    d = np.asarray(d, dtype=float)
    W = np.asarray(W)
    target = np.vdot(P_ref, P_ref).real
    current = float(np.sum(d**2 * np.sum(np.abs(W) ** 2, axis=0)))
    if current <= 0:
        raise ZeroPower("all power coefficients are zero; nothing to rescale")
    if abs(current - target) <= TRACE_RTOL * target:
        return d.copy()
    return np.sqrt(target / current) * d


def _descend(grad_fn, G_hat_S, W, P_ref, settings: PaSettings, rho_f: float, P_budget, callback):
    W = np.asarray(W)
    if settings.d_init is None:
        budget = np.vdot(P_ref, P_ref).real if P_budget is None else P_budget
        d = epl(W, budget)
    else:
        d = _check_d(settings.d_init, W.shape[1]).copy()
    if callback is not None:
        callback(1, d)
    for i in range(2, settings.iterations + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            d = d - settings.step * grad_fn(G_hat_S, W, d, rho_f)
        if not np.all(np.isfinite(d)):
            raise NonFiniteIterate(f"iterate {i} is not finite; step size {settings.step} too large")
        # amplitudes are square roots of powers
        np.maximum(d, 0.0, out=d)
        if callback is not None:
            callback(i, d)
    return rescale_power(d, W, P_ref)


def rgdpa(
    G_hat_S,
    W,
    P_ref,
    settings: PaSettings = PaSettings(),
    rho_f: float = 1.0,
    P_budget: float | None = None,
    callback: Callable[[int, np.ndarray], None] | None = None,
) -> np.ndarray:
    """Robust gradient-descent power allocation on the conditional MSE.

    Starts from ``settings.d_init`` (EPL at the power of ``P_ref`` when unset),
    takes ``iterations - 1`` projected gradient steps and rescales the result
    to the power of ``P_ref``. ``callback(i, d)`` sees every pre-rescale iterate.
    """
    return _descend(grad_conditional, G_hat_S, W, P_ref, settings, rho_f, P_budget, callback)


def gdpa(
    G_hat_S,
    W,
    P_ref,
    settings: PaSettings = PaSettings(),
    rho_f: float = 1.0,
    P_budget: float | None = None,
    callback: Callable[[int, np.ndarray], None] | None = None,
) -> np.ndarray:
    """Non-robust counterpart of ``rgdpa`` using the unconditional gradient."""
    return _descend(grad_unconditional, G_hat_S, W, P_ref, settings, rho_f, P_budget, callback)
