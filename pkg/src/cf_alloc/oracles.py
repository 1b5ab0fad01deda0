"""Independent numerical cross-checks on small random instances.

Each check returns an ``OracleReport``; ``run_fixture`` backs the
``cf-alloc oracle`` command and the acceptance tests. The oracles use brute
force (finite differences, Monte-Carlo averages, dense grids, enumeration)
and never call the code path they check except through its public entry point.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .channel import draw_channel, generate_lsf
from .config import LsfMode, NetworkConfig
from .metrics import conditional_mse, sample_error, trace_expansion_error, unconditional_mse
from .power import grad_conditional, grad_unconditional
from .precoding import mmse_precoder
from .scheduling import (
    AlphaMode,
    AlphaObjective,
    exhaustive_schedule,
    optimize_alpha,
    rc_esg,
    robust_sum_rate,
)


@dataclass
class OracleReport:
    name: str
    passed: bool
    detail: str
    elapsed_s: float = 0.0
    stats: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.elapsed_s:.2f}s)"


def _cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_pa_fixture(rng, M=16, n=8, alpha=0.15, rho_f=None, sigma_w2=1.0):
    """Random estimate/error pair with an MMSE precoder; returns a dict of inputs."""
    rho_f = float(rng.uniform(0.5, 5.0)) if rho_f is None else rho_f
    U = _cn(rng, M, n)
    V = _cn(rng, M, n)
    G_hat = np.sqrt(1 - alpha) * U
    G_tilde = np.sqrt(alpha) * V
    bundle = mmse_precoder(G_hat, rho_f, sigma_w2, float(n))
    d = rng.uniform(0.2, 2.0, size=n)
    return dict(G_hat=G_hat, G_tilde=G_tilde, W=bundle.W, P=bundle.P_full, d=d, rho_f=rho_f, sigma_w2=sigma_w2)


def central_difference(f, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def check_gradients(fixtures=100, M=16, n=8, seed=1, rtol=1e-5) -> OracleReport:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(fixtures):
        fx = random_pa_fixture(rng, M, n)
        for mse, grad in ((conditional_mse, grad_conditional), (unconditional_mse, grad_unconditional)):

            def f(d, mse=mse):
                return mse(fx["G_hat"], fx["G_tilde"], fx["W"], d, fx["rho_f"], fx["sigma_w2"], P_err=fx["P"])

            fd = central_difference(f, fx["d"])
            an = grad(fx["G_hat"], fx["W"], fx["d"], fx["rho_f"])
            worst = max(worst, np.linalg.norm(an - fd) / max(np.linalg.norm(fd), 1e-300))
    return OracleReport(
        "gradient",
        worst < rtol,
        f"max relative error {worst:.2e} over {fixtures} fixtures (tol {rtol:g})",
        time.perf_counter() - t0,
        {"max_rel_error": worst},
    )


def monte_carlo_mse(fx, draws, rng, batch=20_000):
    """Mean and standard error of ||x - y||^2 with fixed estimate and error norms.

    Each draw rotates the error matrix by a uniform random phase so that it
    is zero-mean while G_tilde G_tilde^H stays fixed; x and w are fresh
    complex Gaussians.
    """
    G_hat, G_tilde, W, P, d = fx["G_hat"], fx["G_tilde"], fx["W"], fx["P"], fx["d"]
    rho_f, sigma_w2 = fx["rho_f"], fx["sigma_w2"]
    n = W.shape[1]
    A = np.sqrt(rho_f) * (G_hat.T @ W) * d[None, :]
    E = np.sqrt(rho_f) * (G_tilde.T @ P)
    total, total_sq, count = 0.0, 0.0, 0
    while count < draws:
        b = min(batch, draws - count)
        x = _cn(rng, n, b)
        w = np.sqrt(sigma_w2) * _cn(rng, n, b)
        phase = np.exp(2j * np.pi * rng.uniform(size=b))
        y = A @ x + (E @ x) * phase[None, :] + w
        err = np.sum(np.abs(x - y) ** 2, axis=0)
        total += err.sum()
        total_sq += (err**2).sum()
        count += b
    mean = total / count
    var = (total_sq - count * mean**2) / (count - 1)
    return mean, np.sqrt(var / count)


def check_conditional_mse(fixtures=10, draws=100_000, M=16, n=8, seed=2, n_se=3.0) -> OracleReport:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(fixtures):
        fx = random_pa_fixture(rng, M, n)
        closed = conditional_mse(fx["G_hat"], fx["G_tilde"], fx["W"], fx["d"], fx["rho_f"], fx["sigma_w2"], P_err=fx["P"])
        mean, se = monte_carlo_mse(fx, draws, rng)
        worst = max(worst, abs(mean - closed) / se)
    return OracleReport(
        "conditional-mse",
        worst < n_se,
        f"max |MC - closed form| = {worst:.2f} standard errors over {fixtures} fixtures (tol {n_se:g})",
        time.perf_counter() - t0,
        {"max_z": worst},
    )


def check_trace_expansion(realizations=1000, M=8, n=4, seed=3, tol=1e-10) -> OracleReport:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(realizations):
        fx = random_pa_fixture(rng, M, n)
        # an independent error-term precoder exercises every cross term
        P_err = _cn(rng, M, n)
        x = _cn(rng, n)
        w = np.sqrt(fx["sigma_w2"]) * _cn(rng, n)
        s = np.sqrt(fx["rho_f"])
        y = s * fx["G_hat"].T @ (fx["W"] @ (fx["d"] * x)) + s * fx["G_tilde"].T @ (P_err @ x) + w
        direct = sample_error(x, y)
        expanded = trace_expansion_error(x, w, fx["G_hat"], fx["G_tilde"], fx["W"], fx["d"], fx["rho_f"], P_err=P_err)
        worst = max(worst, abs(direct - expanded) / max(1.0, abs(direct)))
    return OracleReport(
        "trace-expansion",
        worst < tol,
        f"max relative mismatch {worst:.2e} over {realizations} realizations (tol {tol:g})",
        time.perf_counter() - t0,
        {"max_rel_error": worst},
    )


def random_alpha_triples(rng, count):
    """(a, b, c) triples with a share pushed against the Cauchy-Schwarz limit."""
    out = []
    for i in range(count):
        a, b = rng.uniform(0.0, 20.0, size=2)
        bound = np.sqrt(a * b)
        if i % 4 == 0:
            c = np.sign(rng.standard_normal()) * bound * (1 - 10.0 ** rng.uniform(-12, -3))
        elif i % 4 == 1:
            c = np.sign(rng.standard_normal()) * bound
        else:
            c = rng.uniform(-bound, bound)
        out.append(AlphaObjective(float(a), float(b), float(c)))
    return out


def check_optimize_alpha(triples=1000, grid=100_000, alpha_min=0.05, alpha_max=0.3, seed=4, tol=1e-6) -> OracleReport:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    alphas = np.linspace(alpha_min, alpha_max, grid)
    worst = 0.0
    for obj in random_alpha_triples(rng, triples):
        f = obj(alphas)
        for mode, ref in ((AlphaMode.MIN, f.min()), (AlphaMode.MAX, f.max())):
            _, value = optimize_alpha(obj, alpha_min, alpha_max, mode)
            worst = max(worst, abs(value - ref))
    return OracleReport(
        "optimize-alpha",
        worst < tol,
        f"max |closed form - grid| = {worst:.2e} over {triples} triples x 2 modes (tol {tol:g})",
        time.perf_counter() - t0,
        {"max_abs_error": worst},
    )


def check_schedule_sandwich(instances=200, M=8, K=6, n=2, seed=5, snr_db=10.0, floor=0.5) -> OracleReport:
    """exhaustive >= RC-ESG >= first greedy candidate, all under the robust evaluator."""
    t0 = time.perf_counter()
    config = NetworkConfig(M=M, K=K, n=n, rho_f=10 ** (snr_db / 10), trials=instances, seed=seed)
    rng = np.random.default_rng(seed)
    violations = 0
    equal = 0
    for _ in range(instances):
        B = generate_lsf(config, LsfMode.LOG_DISTANCE, rng)
        channel = draw_channel(B, config.alpha, rng)
        sr_eval = robust_sum_rate(channel, config)
        ex = exhaustive_schedule(channel, config, sr_eval=sr_eval)
        rc = rc_esg(channel, config, sr_eval=sr_eval)
        first = rc.candidate_history[0][1]
        tol = 1e-12 * max(1.0, ex.sr_estimate)
        if not (ex.sr_estimate + tol >= rc.sr_estimate >= first - tol):
            violations += 1
        if abs(ex.sr_estimate - rc.sr_estimate) <= tol:
            equal += 1
    rate = equal / instances
    return OracleReport(
        "schedule-sandwich",
        violations == 0 and rate >= floor,
        f"{violations} sandwich violations, exhaustive == RC-ESG in {rate:.1%} of {instances} instances (floor {floor:.0%})",
        time.perf_counter() - t0,
        {"violations": violations, "equality_rate": rate},
    )


FIXTURES = {
    "gradient": check_gradients,
    "mse": check_conditional_mse,
    "trace": check_trace_expansion,
    "alpha": check_optimize_alpha,
    "schedule": check_schedule_sandwich,
}


def run_fixture(name: str) -> list[OracleReport]:
    if name == "all":
        return [fn() for fn in FIXTURES.values()]
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES) + ['all']}")
    return [FIXTURES[name]()]
