"""Acceptance criteria, each at its stated tolerance and time budget.

Every test records a PASS/FAIL line that is printed in the terminal summary.
The full-scale sweep takes a few minutes; it is marked ``slow`` but runs by default.
"""

import time

import numpy as np
import pytest

from cf_alloc.config import CsiMode, ExperimentSpec, LsfMode, NetworkConfig, PowerAllocator, Scheduler
from cf_alloc.harness import run_sweep
from cf_alloc.metrics import conditional_mse
from cf_alloc.oracles import (
    check_conditional_mse,
    check_gradients,
    check_optimize_alpha,
    check_schedule_sandwich,
    check_trace_expansion,
    random_pa_fixture,
)
from cf_alloc.power import PaSettings, gdpa, rgdpa, safe_step
from cf_alloc.precoding import mmse_precoder

from conftest import ACCEPTANCE_LINES

FULL_SCALE_SNR_DB = (0.0, 7.5, 15.0, 22.5, 30.0)


def record(number, title, passed, detail, elapsed, budget):
    ok = passed and elapsed < budget
    ACCEPTANCE_LINES[number] = (
        f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail} ({elapsed:.1f}s, budget {budget:g}s)"
    )
    return ok


def oracle_criterion(number, title, check, budget):
    report = check()
    assert record(number, title, report.passed, report.detail, report.elapsed_s, budget), ACCEPTANCE_LINES[number]
    return report


def test_1_gradients():
    oracle_criterion(1, "gradients vs central differences", check_gradients, 10)


def test_2_conditional_mse():
    oracle_criterion(2, "conditional MSE vs Monte-Carlo", check_conditional_mse, 60)


def test_3_trace_expansion():
    oracle_criterion(3, "trace expansion vs direct error", check_trace_expansion, 10)


def test_4_schedule_sandwich():
    report = oracle_criterion(4, "scheduling sandwich", check_schedule_sandwich, 60)
    print(f"exhaustive == RC-ESG rate: {report.stats['equality_rate']:.3f}")


def test_5_optimize_alpha():
    oracle_criterion(5, "inner alpha optimization vs grid", check_optimize_alpha, 30)


def paired_z(diff):
    return diff.mean() / (diff.std(ddof=1) / np.sqrt(diff.size))


@pytest.mark.slow
def test_6_full_scale_ordering():
    spec = ExperimentSpec(
        config=NetworkConfig(M=64, K=32, n=16, alpha=0.15, alpha_min=0.05, alpha_max=0.3, seed=2024, trials=100),
        snr_grid_db=FULL_SCALE_SNR_DB,
        schedulers=(Scheduler.CESG, Scheduler.RCESG),
        power_allocators=(PowerAllocator.EPL, PowerAllocator.GDPA, PowerAllocator.RGDPA),
        csi_modes=(CsiMode.PERFECT, CsiMode.IMPERFECT),
        lsf_mode=LsfMode.LOG_DISTANCE,
    )
    t0 = time.perf_counter()
    result = run_sweep(spec)
    elapsed = time.perf_counter() - t0
    ICSI, PCSI = CsiMode.IMPERFECT, CsiMode.PERFECT
    EPL, GDPA, RGDPA = PowerAllocator.EPL, PowerAllocator.GDPA, PowerAllocator.RGDPA
    CESG, RCESG = Scheduler.CESG, Scheduler.RCESG
    checks = {}
    for snr in FULL_SCALE_SNR_DB:
        for sched in (CESG, RCESG):
            for pa in (EPL, GDPA, RGDPA):
                checks[f"PCSI>ICSI {sched.value}/{pa.value} @{snr:g}dB"] = paired_z(
                    result.paired(snr, (sched, pa, PCSI), (sched, pa, ICSI))
                )
        # scheduler comparison under equal power loading
        checks[f"RC-ESG>C-ESG EPL @{snr:g}dB"] = paired_z(result.paired(snr, (RCESG, EPL, ICSI), (CESG, EPL, ICSI)))
        # power allocation comparison under C-ESG scheduling
        checks[f"RGDPA>GDPA CESG @{snr:g}dB"] = paired_z(result.paired(snr, (CESG, RGDPA, ICSI), (CESG, GDPA, ICSI)))
    for name, z in checks.items():
        print(f"{name}: z = {z:.2f}")
    failed = {k: v for k, v in checks.items() if not v > 2.0}
    worst = min(checks, key=checks.get)
    detail = f"{len(checks) - len(failed)}/{len(checks)} orderings with paired mean > 2 SE, weakest {worst} z={checks[worst]:.2f}"
    assert result.skipped_trials == 0
    assert record(6, "full-scale ordering", not failed, detail, elapsed, 15 * 60), (ACCEPTANCE_LINES[6], failed)


def test_7_power_constraint():
    # the harness asserts the constraint on every precoder and allocator output
    t0 = time.perf_counter()
    spec = ExperimentSpec(
        config=NetworkConfig(M=8, K=6, n=2, seed=7, trials=10),
        snr_grid_db=(-10.0, 10.0, 30.0),
        schedulers=(Scheduler.CESG, Scheduler.RCESG, Scheduler.EXHAUSTIVE),
        power_allocators=tuple(PowerAllocator),
    )
    run_sweep(spec)
    rng = np.random.default_rng(70)
    worst = 0.0
    for _ in range(100):
        fx = random_pa_fixture(rng, M=16, n=8)
        budget = 8.0
        bundle = mmse_precoder(fx["G_hat"], fx["rho_f"], fx["sigma_w2"], budget)
        outputs = [bundle.P_full]
        # same step rule as the harness
        step = min(0.01, 0.5 * safe_step(fx["G_hat"], bundle.W, fx["rho_f"]))
        for algo in (rgdpa, gdpa):
            outputs.append(bundle.W * algo(fx["G_hat"], bundle.W, bundle.P_full, PaSettings(step=step), fx["rho_f"]))
        for P in outputs:
            worst = max(worst, abs(np.vdot(P, P).real - budget) / budget)
    elapsed = time.perf_counter() - t0
    assert record(7, "Frobenius power constraint", worst < 1e-9, f"max relative deviation {worst:.1e} (tol 1e-9)", elapsed, 600)


def test_8_descent():
    t0 = time.perf_counter()
    rng = np.random.default_rng(80)
    violations, worst_rise = 0, 0.0
    for _ in range(100):
        fx = random_pa_fixture(rng, M=16, n=8)
        values = []

        def track(i, d):
            values.append(
                conditional_mse(fx["G_hat"], fx["G_tilde"], fx["W"], d, fx["rho_f"], fx["sigma_w2"], P_err=fx["P"])
            )

        rgdpa(fx["G_hat"], fx["W"], fx["P"], PaSettings(), fx["rho_f"], callback=track)
        rise = np.max(np.diff(values) / values[0])
        worst_rise = max(worst_rise, rise)
        violations += rise > 1e-12
    elapsed = time.perf_counter() - t0
    detail = f"{violations} of 100 fixtures with an MSE increase (largest relative step change {worst_rise:.1e})"
    assert record(8, "RGDPA descent with default step", violations == 0, detail, elapsed, 600)


def test_9_reproducibility(tmp_path):
    t0 = time.perf_counter()
    spec = ExperimentSpec(
        config=NetworkConfig(M=8, K=6, n=2, seed=9, trials=5),
        snr_grid_db=(0.0, 20.0),
        schedulers=(Scheduler.CESG, Scheduler.RCESG),
        power_allocators=(PowerAllocator.EPL, PowerAllocator.RGDPA),
    )
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        run_sweep(spec).write_csv(p, timestamp=False)
    same = paths[0].read_bytes() == paths[1].read_bytes()
    elapsed = time.perf_counter() - t0
    assert record(9, "byte-identical CSV", same, "two runs identical" if same else "runs differ", elapsed, 600)
