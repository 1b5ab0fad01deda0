"""Monte-Carlo sweeps over SNR and scheduler / power-allocator / CSI combinations."""

from __future__ import annotations

import datetime
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import ChannelSet, draw_channel, generate_lsf
from .config import CsiMode, ExperimentSpec, NetworkConfig, PowerAllocator, Scheduler
from .errors import IoFailure, NumericalFailure, ZeroChannel
from .metrics import sum_rate
from .power import PaSettings, epl, gdpa, rgdpa, safe_step
from .precoding import mmse_precoder
from .scheduling import c_esg, exhaustive_schedule, rc_esg

log = logging.getLogger(__name__)

CSV_HEADER = "snr_db,scheduler,power_allocator,csi_mode,mean_sum_rate,std_sum_rate,trials"
POWER_RTOL = 1e-9

Combo = tuple[Scheduler, PowerAllocator, CsiMode]


@dataclass(frozen=True)
class TrialSample:
    scheduler: Scheduler
    power_allocator: PowerAllocator
    csi_mode: CsiMode
    sum_rate: float
    scheduler_sum_rate: float
    ues: tuple[int, ...]


@dataclass(frozen=True)
class ResultRow:
    snr_db: float
    scheduler: Scheduler
    power_allocator: PowerAllocator
    csi_mode: CsiMode
    mean_sum_rate: float
    std_sum_rate: float
    trials: int

    def sort_key(self):
        return (self.snr_db, self.scheduler.value, self.power_allocator.value, self.csi_mode.value)

    def to_csv(self) -> str:
        return ",".join(
            [
                f"{self.snr_db:.6g}",
                self.scheduler.value,
                self.power_allocator.value,
                self.csi_mode.value,
                f"{self.mean_sum_rate:.6g}",
                f"{self.std_sum_rate:.6g}",
                str(self.trials),
            ]
        )


@dataclass
class ExperimentResult:
    rows: list[ResultRow]
    # (snr_db, scheduler, pa, csi) -> per-trial realized sum-rates, trial order
    samples: dict[tuple, np.ndarray] = field(default_factory=dict)
    skipped_trials: int = 0

    def paired(self, snr_db: float, a: Combo, b: Combo) -> np.ndarray:
        """Per-trial differences a - b on the shared channel realizations."""
        return self.samples[(snr_db, *a)] - self.samples[(snr_db, *b)]

    def to_csv(self, timestamp: bool = True) -> str:
        lines = []
        if timestamp:
            now = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
            lines.append(f"# generated {now}")
        lines.append(CSV_HEADER)
        lines.extend(r.to_csv() for r in sorted(self.rows, key=ResultRow.sort_key))
        if self.skipped_trials:
            lines.append(f"# skipped_trials={self.skipped_trials}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str | Path, timestamp: bool = True) -> None:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(self.to_csv(timestamp))
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial_index]))


def draw_trial_channel(spec: ExperimentSpec, trial_index: int, config: NetworkConfig | None = None) -> ChannelSet:
    config = config or spec.config
    rng = trial_rng(config.seed, trial_index)
    B = generate_lsf(config, spec.lsf_mode, rng)
    return draw_channel(B, config.alpha, rng)


def check_power(P: np.ndarray, target: float, what: str) -> None:
    power = np.vdot(P, P).real
    if abs(power - target) > POWER_RTOL * target:
        raise NumericalFailure(f"{what}: ||P||_F^2 = {power!r} violates budget {target!r}")


def _schedule(scheduler: Scheduler, channel: ChannelSet, config: NetworkConfig):
    if scheduler is Scheduler.RCESG:
        return rc_esg(channel, config)
    if scheduler is Scheduler.CESG:
        return c_esg(channel, config)
    return exhaustive_schedule(channel, config, robust=True)


def _allocate(pa: PowerAllocator, G_hat_S, bundle, spec: ExperimentSpec, config: NetworkConfig) -> np.ndarray:
    if pa is PowerAllocator.EPL:
        return epl(bundle.W, config.P_budget)
    # fixed steps diverge once rho_f * lambda_max grows; cap at half the safe bound,
    # which still descends and never zeroes a GDPA coefficient in one step
    step = min(spec.pa_step, 0.5 * safe_step(G_hat_S, bundle.W, config.rho_f))
    settings = PaSettings(step=step, iterations=spec.pa_iterations)
    algo = rgdpa if pa is PowerAllocator.RGDPA else gdpa
    return algo(G_hat_S, bundle.W, bundle.P_full, settings, config.rho_f, P_budget=config.P_budget)


def run_trial(config: NetworkConfig, spec: ExperimentSpec, trial_index: int) -> list[TrialSample]:
    """All method combinations on one shared channel realization.

    The scheduler, precoder and power allocator see only the estimate of
    the chosen CSI mode; the realized rate includes that mode's true error.
    """
    channel = draw_trial_channel(spec, trial_index, config)
    out = []
    for csi in spec.csi_modes:
        visible = channel.perfect() if csi is CsiMode.PERFECT else channel
        for scheduler in spec.schedulers:
            selection = _schedule(scheduler, visible, config)
            S = list(selection.S_n)
            G_hat_S, G_tilde_S = visible.G_hat[:, S], visible.G_tilde[:, S]
            bundle = mmse_precoder(G_hat_S, config.rho_f, config.sigma_w2, config.P_budget)
            check_power(bundle.P_full, config.P_budget, "MMSE precoder")
            for pa in spec.power_allocators:
                d = _allocate(pa, G_hat_S, bundle, spec, config)
                P = bundle.W * d
                check_power(P, config.P_budget, f"{pa.value} output")
                sr = sum_rate(G_hat_S, G_tilde_S, P, config.rho_f, config.sigma_w2)
                out.append(TrialSample(scheduler, pa, csi, sr, selection.sr_estimate, tuple(S)))
    return out


def _snr_trials(args):
    config, spec, trial_index = args
    try:
        return run_trial(config, spec, trial_index)
    except ZeroChannel:
        return None


def run_sweep(spec: ExperimentSpec, jobs: int = 1) -> ExperimentResult:
    """Run ``config.trials`` trials per SNR point and aggregate per combination.

    Trial t uses the same channel realization at every SNR point, so curves
    are paired across SNR as well as across methods.
    """
    combos = list(itertools.product(spec.schedulers, spec.power_allocators, spec.csi_modes))
    rows: list[ResultRow] = []
    samples: dict[tuple, np.ndarray] = {}
    skipped_total = 0
    base = spec.config
    for snr_db in spec.snr_grid_db:
        config = base.replace(rho_f=float(10.0 ** (snr_db / 10.0)))
        tasks = [(config, spec, t) for t in range(base.trials)]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_snr_trials, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
        else:
            results = [_snr_trials(t) for t in tasks]
        per_combo: dict[Combo, list[float]] = {c: [] for c in combos}
        skipped = 0
        for trial in results:
            if trial is None:
                skipped += 1
                continue
            for s in trial:
                per_combo[(s.scheduler, s.power_allocator, s.csi_mode)].append(s.sum_rate)
        if skipped:
            log.warning("snr %.6g dB: skipped %d trials with an all-zero channel estimate", snr_db, skipped)
        skipped_total += skipped
        for combo, values in per_combo.items():
            arr = np.asarray(values)
            samples[(snr_db, *combo)] = arr
            std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
            mean = float(arr.mean()) if arr.size else float("nan")
            rows.append(ResultRow(snr_db, *combo, mean, std, int(arr.size)))
        log.info("snr %.6g dB done", snr_db)
    rows.sort(key=ResultRow.sort_key)
    return ExperimentResult(rows=rows, samples=samples, skipped_trials=skipped_total)
