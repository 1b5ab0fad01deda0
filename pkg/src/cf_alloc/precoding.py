"""MMSE precoder construction, W/D factorization and the downlink signal."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, ZeroChannel


@dataclass(frozen=True, eq=False)
class PrecoderBundle:
    """Full precoder ``P_full = W @ diag(d)`` with unit-norm columns in ``W``."""

    P_full: np.ndarray
    W: np.ndarray
    d: np.ndarray


def mmse_precoder(G_hat_S: np.ndarray, rho_f: float, sigma_w2: float, P_budget: float) -> PrecoderBundle:
    """Regularized channel inversion scaled to use the whole power budget.

    P_raw = conj(G) (G^T conj(G) + xi I)^-1 with xi = n sigma_w2 / (rho_f P_budget),
    then rescaled so that ||P_full||_F^2 == P_budget.
    """
    G = np.asarray(G_hat_S)
    if G.ndim != 2:
        raise DimensionMismatch(f"expected an M x n matrix, got shape {G.shape}")
    M, n = G.shape
    if n > M:
        raise DimensionMismatch(f"cannot precode n={n} streams with M={M} antennas")
    if rho_f <= 0:
        raise ValueError("rho_f must be positive to build an MMSE precoder")
    if not np.any(G):
        raise ZeroChannel("channel estimate is identically zero")
    xi = n * sigma_w2 / (rho_f * P_budget)
    gram = G.T @ G.conj() + xi * np.eye(n)
    # gram is Hermitian PD; (gram^-1)^T = conj(gram)^-1, so solve for the transpose
    P_raw = scipy.linalg.solve(gram.conj(), G.conj().T, assume_a="pos").T
    power = np.vdot(P_raw, P_raw).real
    if not power > 0:
        raise ZeroChannel("MMSE precoder has zero power")
    P_full = np.sqrt(P_budget / power) * P_raw
    d = np.linalg.norm(P_full, axis=0)
    if np.any(d == 0):
        raise ZeroChannel("a scheduled UE has an all-zero channel estimate")
    W = P_full / d
    return PrecoderBundle(P_full=P_full, W=W, d=d)


def apply_power(W: np.ndarray, d: np.ndarray) -> np.ndarray:
    W = np.asarray(W)
    d = np.asarray(d, dtype=float)
    if W.ndim != 2 or d.ndim != 1 or W.shape[1] != d.shape[0]:
        raise DimensionMismatch(f"W {W.shape} incompatible with d {d.shape}")
    return W * d[None, :]


def simulate_downlink(G_hat_S, G_tilde_S, P_full, x, w, rho_f: float) -> np.ndarray:
    """Received vector y = sqrt(rho_f) (G_hat + G_tilde)^T P x + w."""
    G_hat_S = np.asarray(G_hat_S)
    G_tilde_S = np.asarray(G_tilde_S)
    P_full = np.asarray(P_full)
    x = np.asarray(x)
    w = np.asarray(w)
    n = P_full.shape[1]
    if (
        G_hat_S.shape != G_tilde_S.shape
        or G_hat_S.shape[0] != P_full.shape[0]
        or x.shape[0] != n
        or w.shape != (G_hat_S.shape[1],) + x.shape[1:]
    ):
        raise DimensionMismatch("inconsistent downlink dimensions")
    s = np.sqrt(rho_f)
    Px = P_full @ x
    return s * (G_hat_S.T @ Px) + s * (G_tilde_S.T @ Px) + w
