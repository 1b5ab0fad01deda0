import numpy as np
import pytest

from cf_alloc.errors import DimensionMismatch, NumericalFailure
from cf_alloc.metrics import (
    conditional_mse,
    sample_error,
    sum_rate,
    sum_rate_direct,
    trace_expansion_error,
    unconditional_mse,
)
from cf_alloc.oracles import monte_carlo_mse, random_pa_fixture
from cf_alloc.precoding import mmse_precoder

from conftest import cn


def test_identity_sum_rate():
    I2 = np.eye(2, dtype=complex)
    assert sum_rate(I2, np.zeros((2, 2)), I2, 1.0, 1.0) == pytest.approx(2.0, abs=1e-12)


def test_zero_precoder_gives_zero_rate(rng):
    G = cn(rng, 4, 2)
    assert sum_rate(G, cn(rng, 4, 2), np.zeros((4, 2)), 5.0, 1.0) == 0.0


def test_stable_form_matches_direct(rng):
    for _ in range(50):
        G, Gt, P = cn(rng, 8, 4), 0.4 * cn(rng, 8, 4), cn(rng, 8, 4)
        rho = rng.uniform(0.1, 100)
        a = sum_rate(G, Gt, P, rho, 1.0)
        b = sum_rate_direct(G, Gt, P, rho, 1.0)
        assert a == pytest.approx(b, rel=1e-9)


def test_not_positive_definite_raises(rng):
    G = cn(rng, 4, 2)
    with pytest.raises(NumericalFailure):
        sum_rate(G, None, cn(rng, 4, 2), 1.0, -1.0)


def test_monotone_in_rho_without_error(rng):
    G = cn(rng, 8, 4)
    P = mmse_precoder(G, 1.0, 1.0, 4.0).P_full
    rates = [sum_rate(G, np.zeros_like(G), P, rho, 1.0) for rho in np.logspace(-2, 3, 20)]
    assert np.all(np.diff(rates) >= 0)


def test_perfect_csi_beats_imperfect_on_average():
    rng = np.random.default_rng(11)
    gaps = []
    for _ in range(100):
        U, V = cn(rng, 16, 6), cn(rng, 16, 6)
        rho = 10.0
        P0 = mmse_precoder(U, rho, 1.0, 6.0).P_full
        perfect = sum_rate(U, np.zeros_like(U), P0, rho, 1.0)
        Gh, Gt = np.sqrt(0.85) * U, np.sqrt(0.15) * V
        P1 = mmse_precoder(Gh, rho, 1.0, 6.0).P_full
        gaps.append(perfect - sum_rate(Gh, Gt, P1, rho, 1.0))
    assert np.mean(gaps) >= 0


def test_sample_error_examples(rng):
    x = cn(rng, 3)
    assert sample_error(x, x) == 0.0
    assert sample_error(np.array([1, 0]), np.array([0, 0])) == 1.0
    with pytest.raises(DimensionMismatch):
        sample_error(np.ones(2), np.ones(3))


def test_sample_error_matches_trace_expansion(rng):
    fx = random_pa_fixture(rng, M=6, n=3)
    x, w = cn(rng, 3), cn(rng, 3)
    s = np.sqrt(fx["rho_f"])
    P = fx["W"] * fx["d"]
    y = s * fx["G_hat"].T @ P @ x + s * fx["G_tilde"].T @ P @ x + w
    expanded = trace_expansion_error(x, w, fx["G_hat"], fx["G_tilde"], fx["W"], fx["d"], fx["rho_f"])
    assert abs(sample_error(x, y) - expanded) < 1e-10 * max(1, expanded)


def test_conditional_mse_examples():
    W = np.eye(2, dtype=complex)
    G = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), complex)
    assert conditional_mse(G, zero, W, np.zeros(2), 1.0, 1.0) == pytest.approx(4.0)
    # G^T W = I, no error, d = 1: 2 + 1 + 2 - 2 - 2
    assert conditional_mse(G, zero, W, np.ones(2), 1.0, 0.5) == pytest.approx(1.0)


def test_unconditional_mse_examples(rng):
    fx = random_pa_fixture(rng, M=6, n=3)
    args = (fx["G_hat"], fx["G_tilde"], fx["W"])
    n, s2 = 3, fx["sigma_w2"]
    assert unconditional_mse(*args, np.zeros(3), fx["rho_f"], s2) == pytest.approx(n + n * s2)
    u = unconditional_mse(*args, fx["d"], fx["rho_f"], s2, P_err=fx["P"])
    c = conditional_mse(*args, fx["d"], fx["rho_f"], s2, P_err=fx["P"])
    lin = np.trace(np.sqrt(fx["rho_f"]) * fx["G_hat"].T @ fx["W"] @ np.diag(fx["d"]))
    lin += np.trace(np.sqrt(fx["rho_f"]) * np.diag(fx["d"]) @ fx["W"].conj().T @ fx["G_hat"].conj())
    assert u - c == pytest.approx(lin.real, rel=1e-12)
    assert u >= n + n * s2


def test_conditional_mse_against_literal_traces(rng):
    fx = random_pa_fixture(rng, M=7, n=3)
    Gh, Gt, W, d, rho, s2 = fx["G_hat"], fx["G_tilde"], fx["W"], fx["d"], fx["rho_f"], fx["sigma_w2"]
    D = np.diag(d)
    P = W @ D
    H = lambda a: a.conj().T  # noqa: E731
    literal = (
        3 + 3 * s2
        + np.trace(rho * D @ H(W) @ Gh.conj() @ Gh.T @ W @ D)
        + np.trace(rho * H(P) @ Gt.conj() @ Gt.T @ P)
        - np.trace(np.sqrt(rho) * Gh.T @ W @ D)
        - np.trace(np.sqrt(rho) * D @ H(W) @ Gh.conj())
    )
    assert abs(literal.imag) < 1e-9
    assert conditional_mse(Gh, Gt, W, d, rho, s2) == pytest.approx(literal.real, rel=1e-12)


def test_conditional_mse_monte_carlo(rng):
    fx = random_pa_fixture(rng, M=8, n=4)
    closed = conditional_mse(fx["G_hat"], fx["G_tilde"], fx["W"], fx["d"], fx["rho_f"], fx["sigma_w2"], P_err=fx["P"])
    mean, se = monte_carlo_mse(fx, 100_000, rng)
    assert abs(mean - closed) < 3 * se


def test_mse_dimension_checks(rng):
    fx = random_pa_fixture(rng, M=6, n=3)
    with pytest.raises(DimensionMismatch):
        conditional_mse(fx["G_hat"], fx["G_tilde"], fx["W"], np.ones(2), 1.0, 1.0)
    with pytest.raises(DimensionMismatch):
        unconditional_mse(fx["G_hat"][:, :2], fx["G_tilde"], fx["W"], fx["d"], 1.0, 1.0)
