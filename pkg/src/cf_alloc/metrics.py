"""Sum-rate and MSE figures of merit.

Conventions: ``G_hat_S``/``G_tilde_S`` are the M x n columns of the scheduled
UEs, ``W`` is the column-normalized precoder and ``d`` the per-stream
amplitudes. In the MSE expressions the error term is driven by a precoder
``P_err`` that is held fixed while ``d`` varies (the reference precoder the
power allocator rescales to); it defaults to ``W @ diag(d)``.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NumericalFailure

HERMITIAN_TOL = 1e-10
IMAG_TOL = 1e-9


def _hermitian_logdet(X: np.ndarray) -> float:
    asym = np.max(np.abs(X - X.conj().T), initial=0.0)
    scale = max(1.0, np.max(np.abs(X), initial=0.0))
    if asym > HERMITIAN_TOL * scale:
        raise NumericalFailure(f"matrix is not Hermitian (asymmetry {asym:.3e})")
    X = 0.5 * (X + X.conj().T)
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        raise NumericalFailure("matrix is not positive definite") from None
    return 2.0 * float(np.sum(np.log2(np.abs(np.diag(L)))))


def sum_rate(G_hat_S, G_tilde_S, P_full, rho_f: float, sigma_w2: float) -> float:
    """log2 det(I + A N^-1) evaluated as log2 det(N + A) - log2 det(N).

    A is the desired-signal covariance through the estimate, N the error
    leakage plus noise covariance.
    """
    G_hat_S = np.asarray(G_hat_S)
    P_full = np.asarray(P_full)
    if G_hat_S.shape != P_full.shape:
        raise DimensionMismatch(f"G_hat_S {G_hat_S.shape} vs P {P_full.shape}")
    n = P_full.shape[1]
    H = G_hat_S.T @ P_full
    A = rho_f * (H @ H.conj().T)
    N = sigma_w2 * np.eye(n, dtype=complex)
    if G_tilde_S is not None:
        G_tilde_S = np.asarray(G_tilde_S)
        if G_tilde_S.shape != P_full.shape:
            raise DimensionMismatch(f"G_tilde_S {G_tilde_S.shape} vs P {P_full.shape}")
        E = G_tilde_S.T @ P_full
        N = N + rho_f * (E @ E.conj().T)
    value = _hermitian_logdet(N + A) - _hermitian_logdet(N)
    if not np.isfinite(value):
        raise NumericalFailure("non-finite sum-rate")
    # det(N + A) >= det(N) for PSD A; clip round-off below zero
    return max(value, 0.0)


def sum_rate_direct(G_hat_S, G_tilde_S, P_full, rho_f: float, sigma_w2: float) -> float:
    """Textbook evaluation through R_CF = A N^-1; used as a cross-check only."""
    n = P_full.shape[1]
    H = G_hat_S.T @ P_full
    E = G_tilde_S.T @ P_full
    A = rho_f * H @ H.conj().T
    N = rho_f * E @ E.conj().T + sigma_w2 * np.eye(n)
    R = A @ np.linalg.inv(N)
    return float(np.log2(np.abs(np.linalg.det(R + np.eye(n)))))


def sample_error(x, y) -> float:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise DimensionMismatch(f"{x.shape} vs {y.shape}")
    diff = x - y
    return float(np.vdot(diff, diff).real)


def _check_mse_inputs(G_hat_S, G_tilde_S, W, d, P_err):
    G_hat_S = np.asarray(G_hat_S)
    G_tilde_S = np.asarray(G_tilde_S)
    W = np.asarray(W)
    d = np.asarray(d, dtype=float)
    if W.ndim != 2 or d.shape != (W.shape[1],) or G_hat_S.shape != W.shape or G_tilde_S.shape != W.shape:
        raise DimensionMismatch(
            f"G_hat {G_hat_S.shape}, G_tilde {G_tilde_S.shape}, W {W.shape}, d {d.shape}"
        )
    P_err = W * d[None, :] if P_err is None else np.asarray(P_err)
    if P_err.shape != W.shape:
        raise DimensionMismatch(f"P_err {P_err.shape} vs W {W.shape}")
    return G_hat_S, G_tilde_S, W, d, P_err


def _mse_parts(G_hat_S, G_tilde_S, W, d, rho_f, sigma_w2, P_err):
    G_hat_S, G_tilde_S, W, d, P_err = _check_mse_inputs(G_hat_S, G_tilde_S, W, d, P_err)
    n = W.shape[1]
    eff = G_hat_S.T @ W  # n x n, conj-transpose gives W^H G_hat^*
    desired = rho_f * np.sum(d**2 * np.sum(np.abs(eff) ** 2, axis=0))
    leak = G_tilde_S.T @ P_err
    error = rho_f * np.vdot(leak, leak).real
    # Tr(sqrt(rho) G^T W D) + Tr(sqrt(rho) D W^H G^*) = 2 sqrt(rho) Re sum_i d_i eff_ii
    linear = 2.0 * np.sqrt(rho_f) * np.sum(d * np.diag(eff).real)
    return n + n * sigma_w2, desired, error, linear


def conditional_mse(G_hat_S, G_tilde_S, W, d, rho_f: float, sigma_w2: float, P_err=None) -> float:
    """Expected ||x - y||^2 given the estimate, zero-mean error terms dropped."""
    const, desired, error, linear = _mse_parts(G_hat_S, G_tilde_S, W, d, rho_f, sigma_w2, P_err)
    return float(const + desired + error - linear)


def unconditional_mse(G_hat_S, G_tilde_S, W, d, rho_f: float, sigma_w2: float, P_err=None) -> float:
    """MSE with the estimate itself treated as zero-mean; lacks the linear term."""
    const, desired, error, _ = _mse_parts(G_hat_S, G_tilde_S, W, d, rho_f, sigma_w2, P_err)
    return float(const + desired + error)


def trace_expansion_error(x, w, G_hat_S, G_tilde_S, W, d, rho_f: float, P_err=None) -> float:
    """||x - y||^2 expanded term by term into traces, for a single realization.

    ``y`` here is sqrt(rho) G_hat^T W diag(d) x + sqrt(rho) G_tilde^T P_err x + w.
    Used only to cross-check ``sample_error``; the optimizers never call it.
    """
    G_hat_S, G_tilde_S, W, d, P_err = _check_mse_inputs(G_hat_S, G_tilde_S, W, d, P_err)
    x = np.asarray(x, dtype=complex).reshape(-1, 1)
    w = np.asarray(w, dtype=complex).reshape(-1, 1)
    if x.shape != w.shape or x.shape[0] != W.shape[1]:
        raise DimensionMismatch("x and w must have length n")
    D = np.diag(d).astype(complex)
    H = lambda a: a.conj().T  # noqa: E731
    s = np.sqrt(rho_f)
    Gh, Gt, P = G_hat_S, G_tilde_S, P_err
    tr = np.trace
    terms = [
        tr(H(x) @ x),
        -tr(H(x) @ w),
        -tr(H(w) @ x),
        tr(H(w) @ w),
        tr(rho_f * H(x) @ D @ H(W) @ Gh.conj() @ Gh.T @ W @ D @ x),
        tr(rho_f * H(x) @ H(P) @ Gt.conj() @ Gt.T @ P @ x),
        -tr(s * H(x) @ Gh.T @ W @ D @ x),
        -tr(s * H(x) @ D @ H(W) @ Gh.conj() @ x),
        -tr(s * H(x) @ Gt.T @ P @ x),
        -tr(s * H(x) @ H(P) @ Gt.conj() @ x),
        tr(rho_f * H(x) @ D @ H(W) @ Gh.conj() @ Gt.T @ P @ x),
        tr(rho_f * H(x) @ H(P) @ Gt.conj() @ Gh.T @ W @ D @ x),
        tr(s * H(x) @ D @ H(W) @ Gh.conj() @ w),
        tr(s * H(w) @ Gh.T @ W @ D @ x),
        tr(s * H(w) @ Gt.T @ P @ x),
        tr(s * H(x) @ H(P) @ Gt.conj() @ w),
    ]
    total = complex(sum(terms))
    if abs(total.imag) > IMAG_TOL * max(1.0, abs(total.real)):
        raise NumericalFailure(f"trace expansion has imaginary residue {total.imag:.3e}")
    return total.real
