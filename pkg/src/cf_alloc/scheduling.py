"""Multiuser scheduling: robust (RC-ESG), non-robust (C-ESG) and exhaustive.

Candidate sets are scored by a scheduler-side sum-rate with MMSE precoding
and equal power loading. The non-robust schedulers use the channel estimate
alone. The robust scheduler ranks single UEs by the worst (or best) channel
norm ||g_k(alpha)||^2 over the admissible interval [alpha_min, alpha_max]
and scores sets by their worst-case sum-rate over the admissible errors.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .channel import ChannelSet
from .config import EXHAUSTIVE_LIMIT, NetworkConfig
from .errors import EmptyCandidateSet, TooManySubsets
from .metrics import sum_rate
from .precoding import mmse_precoder

UeSet = tuple[int, ...]
SrEvaluator = Callable[[Sequence[int]], float]

TIE_RTOL = 1e-12


class AlphaMode(str, enum.Enum):
    MIN = "Min"
    MAX = "Max"


@dataclass(frozen=True)
class AlphaObjective:
    """Coefficients of f(alpha) = (1-alpha) a + alpha b + 2 sqrt(alpha (1-alpha)) c."""

    a: float
    b: float
    c: float

    def __call__(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        return (1.0 - alpha) * self.a + alpha * self.b + 2.0 * np.sqrt(alpha * (1.0 - alpha)) * self.c

    def derivative(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        return self.b - self.a + self.c * (1.0 - 2.0 * alpha) / np.sqrt(alpha * (1.0 - alpha))


@dataclass
class ScheduleSelection:
    S_n: UeSet
    sr_estimate: float
    candidate_history: list[tuple[UeSet, float]] = field(default_factory=list)


def alpha_objective(channel: ChannelSet, k: int) -> AlphaObjective:
    u = channel.U[:, k]
    v = channel.V[:, k]
    return AlphaObjective(
        a=float(np.vdot(u, u).real),
        b=float(np.vdot(v, v).real),
        c=float(np.vdot(u, v).real),
    )


def _pick(alphas: list[float], values: list[float], mode: AlphaMode) -> tuple[float, float]:
    order = sorted(range(len(alphas)), key=lambda i: alphas[i])
    best = max(values) if mode is AlphaMode.MAX else min(values)
    tol = TIE_RTOL * max(1.0, abs(best))
    for i in order:
        if abs(values[i] - best) <= tol:
            return alphas[i], values[i]
    raise AssertionError("unreachable")


def optimize_alpha(
    obj: AlphaObjective,
    alpha_min: float,
    alpha_max: float,
    mode: AlphaMode | str = AlphaMode.MIN,
    method: str = "closed_form",
) -> tuple[float, float]:
    """Extremize f(alpha) over [alpha_min, alpha_max]; ties go to the smaller alpha.

    With alpha = sin^2(theta), f becomes (a+b)/2 + (a-b)/2 cos(2 theta) + c sin(2 theta),
    a single sinusoid in 2 theta, so its only interior stationary point follows
    from atan2. ``method="gradient"`` runs projected gradient steps instead.
    """
    mode = AlphaMode(mode)
    if not 0.0 < alpha_min <= alpha_max < 1.0:
        raise ValueError(f"need 0 < alpha_min <= alpha_max < 1, got [{alpha_min}, {alpha_max}]")
    if method == "gradient":
        return _optimize_alpha_gradient(obj, alpha_min, alpha_max, mode)
    if method != "closed_form":
        raise ValueError(f"unknown method {method!r}")
    candidates = [alpha_min, alpha_max]
    psi = math.atan2(obj.c, 0.5 * (obj.a - obj.b)) % math.pi
    for p in (psi, psi + math.pi):
        if p <= math.pi:
            alpha = 0.5 * (1.0 - math.cos(p))
            if alpha_min < alpha < alpha_max:
                candidates.append(alpha)
    values = [float(obj(a)) for a in candidates]
    return _pick(candidates, values, mode)


def _optimize_alpha_gradient(obj, alpha_min, alpha_max, mode, iters=2000):
    sign = 1.0 if mode is AlphaMode.MAX else -1.0
    alphas: list[float] = []
    values: list[float] = []
    # f is a sinusoid in theta, so one start per half of the interval suffices
    for start in (alpha_min, 0.5 * (alpha_min + alpha_max), alpha_max):
        alpha = start
        step = 0.1 * (alpha_max - alpha_min) / max(1.0, abs(obj.a) + abs(obj.b) + abs(obj.c))
        for _ in range(iters):
            g = sign * float(obj.derivative(alpha))
            trial = min(max(alpha + step * g, alpha_min), alpha_max)
            if sign * (float(obj(trial)) - float(obj(alpha))) >= 0:
                if abs(trial - alpha) < 1e-14:
                    break
                alpha = trial
                step *= 1.2
            else:
                step *= 0.5
        alphas.append(alpha)
        values.append(float(obj(alpha)))
    alphas += [alpha_min, alpha_max]
    values += [float(obj(alpha_min)), float(obj(alpha_max))]
    return _pick(alphas, values, mode)


def _robust_scores(channel: ChannelSet, ues: Sequence[int], alpha_min, alpha_max, mode) -> list[float]:
    return [optimize_alpha(alpha_objective(channel, k), alpha_min, alpha_max, mode)[1] for k in ues]


def _argbest(ues: Sequence[int], scores: Sequence[float], maximize: bool) -> int:
    """Index-ordered argmax/argmin; the lowest UE index wins ties."""
    if not ues:
        raise EmptyCandidateSet("no candidate UEs")
    best_k, best_s = None, None
    for k, s in sorted(zip(ues, scores)):
        if best_s is None or (s > best_s if maximize else s < best_s):
            best_k, best_s = k, s
    return best_k


def robust_first_ue(channel: ChannelSet, candidates: Sequence[int], alpha_min: float, alpha_max: float) -> int:
    """UE with the largest worst-case channel norm."""
    candidates = list(candidates)
    scores = _robust_scores(channel, candidates, alpha_min, alpha_max, AlphaMode.MIN)
    return _argbest(candidates, scores, maximize=True)


def worst_ue(channel: ChannelSet, ues: Sequence[int], alpha_min: float, alpha_max: float) -> int:
    """UE whose best-case channel norm is smallest."""
    ues = list(ues)
    scores = _robust_scores(channel, ues, alpha_min, alpha_max, AlphaMode.MAX)
    return _argbest(ues, scores, maximize=False)


def best_ue(channel: ChannelSet, remaining: Sequence[int], alpha_min: float, alpha_max: float) -> int:
    return robust_first_ue(channel, remaining, alpha_min, alpha_max)


def scheduler_sum_rate(channel: ChannelSet, config: NetworkConfig) -> SrEvaluator:
    """Sum-rate the transmitter can predict for a UE set: estimate only, MMSE + EPL.

    The MMSE precoder already meets the budget with equality; EPL then resets
    every column to sqrt(P/|S|). Results are memoized per (unordered) set.
    """
    G_hat = channel.G_hat
    cache: dict[frozenset, float] = {}

    def evaluate(ues: Sequence[int]) -> float:
        key = frozenset(ues)
        if key not in cache:
            cols = G_hat[:, sorted(key)]
            bundle = mmse_precoder(cols, config.rho_f, config.sigma_w2, config.P_budget)
            P = bundle.W * np.sqrt(config.P_budget / len(key))
            cache[key] = sum_rate(cols, None, P, config.rho_f, config.sigma_w2)
        return cache[key]

    return evaluate


def robust_sum_rate(channel: ChannelSet, config: NetworkConfig) -> SrEvaluator:
    """Worst-case sum-rate of a UE set over the admissible estimation errors.

    The estimate G_hat is what the transmitter observes and precodes for
    (MMSE + EPL); the error of UE k is sqrt(alpha) v_k with alpha in
    [alpha_min, alpha_max]. The leakage covariance grows with alpha in the
    Loewner order and log det(N + A) - log det(N) is decreasing in N, so the
    minimum sits at alpha_max.
    """
    G_hat = channel.G_hat
    G_err = np.sqrt(config.alpha_max) * channel.V
    cache: dict[frozenset, float] = {}

    def evaluate(ues: Sequence[int]) -> float:
        key = frozenset(ues)
        if key not in cache:
            cols = sorted(key)
            G_hat_S = G_hat[:, cols]
            bundle = mmse_precoder(G_hat_S, config.rho_f, config.sigma_w2, config.P_budget)
            P = bundle.W * np.sqrt(config.P_budget / len(cols))
            cache[key] = sum_rate(G_hat_S, G_err[:, cols], P, config.rho_f, config.sigma_w2)
        return cache[key]

    return evaluate


def greedy_grow(channel: ChannelSet, first: int, config: NetworkConfig, sr_eval: SrEvaluator) -> tuple[UeSet, float]:
    """Grow a set from ``first`` by best sum-rate augmentation, stopping early on no gain."""
    chosen = [first]
    current = sr_eval(chosen)
    while len(chosen) < config.n:
        best_k, best_sr = None, -math.inf
        for k in range(channel.K):
            if k in chosen:
                continue
            sr = sr_eval(chosen + [k])
            if sr > best_sr:
                best_k, best_sr = k, sr
        if best_k is None or best_sr <= current:
            break
        chosen.append(best_k)
        current = best_sr
    return tuple(chosen), current


def _esg(channel, config, first_fn, worst_fn, best_fn, sr_eval) -> ScheduleSelection:
    all_ues = list(range(channel.K))
    first = first_fn(all_ues)
    chosen, sr = greedy_grow(channel, first, config, sr_eval)
    history = [(chosen, sr)]
    remaining = [k for k in all_ues if k not in chosen]
    current = list(chosen)
    for _ in range(2, channel.K - config.n + 2):
        if not remaining:
            break
        k_wr = worst_fn(current)
        k_b = best_fn(remaining)
        current[current.index(k_wr)] = k_b
        remaining.remove(k_b)
        history.append((tuple(current), sr_eval(current)))
    best_idx = max(range(len(history)), key=lambda i: (history[i][1], -i))
    S_n, sr_best = history[best_idx]
    return ScheduleSelection(S_n=S_n, sr_estimate=sr_best, candidate_history=history)


def rc_esg(channel: ChannelSet, config: NetworkConfig, sr_eval: SrEvaluator | None = None) -> ScheduleSelection:
    """Robust greedy set plus worst-out/best-in swaps, keeping the best candidate."""
    if sr_eval is None:
        sr_eval = robust_sum_rate(channel, config)
    lo, hi = config.alpha_min, config.alpha_max
    worst_case = np.array(_robust_scores(channel, range(channel.K), lo, hi, AlphaMode.MIN))
    best_case = np.array(_robust_scores(channel, range(channel.K), lo, hi, AlphaMode.MAX))
    return _esg(
        channel,
        config,
        first_fn=lambda ues: _argbest(ues, worst_case[list(ues)], maximize=True),
        worst_fn=lambda ues: _argbest(ues, best_case[list(ues)], maximize=False),
        best_fn=lambda ues: _argbest(ues, worst_case[list(ues)], maximize=True),
        sr_eval=sr_eval,
    )


def c_esg(channel: ChannelSet, config: NetworkConfig, sr_eval: SrEvaluator | None = None) -> ScheduleSelection:
    """Same skeleton as ``rc_esg`` ranking UEs by the estimated norm ||g_hat_k||^2."""
    if sr_eval is None:
        sr_eval = scheduler_sum_rate(channel, config)
    norms = np.sum(np.abs(channel.G_hat) ** 2, axis=0)
    return _esg(
        channel,
        config,
        first_fn=lambda ues: _argbest(ues, norms[list(ues)], maximize=True),
        worst_fn=lambda ues: _argbest(ues, norms[list(ues)], maximize=False),
        best_fn=lambda ues: _argbest(ues, norms[list(ues)], maximize=True),
        sr_eval=sr_eval,
    )


def exhaustive_schedule(
    channel: ChannelSet,
    config: NetworkConfig,
    limit: int = EXHAUSTIVE_LIMIT,
    sr_eval: SrEvaluator | None = None,
    robust: bool = False,
    allow_smaller: bool = True,
) -> ScheduleSelection:
    """Best UE set by enumeration, under the robust or the estimate-only evaluator.

    With ``allow_smaller`` every set of 1..n UEs is enumerated, which covers
    the early-stopped sets the greedy schedulers may return; otherwise only
    sets of exactly n UEs.
    """
    sizes = range(1, config.n + 1) if allow_smaller else [config.n]
    count = sum(math.comb(channel.K, s) for s in sizes)
    if count > limit:
        raise TooManySubsets(f"{count} candidate sets for K={channel.K}, n={config.n} exceeds limit {limit}")
    if sr_eval is None:
        sr_eval = robust_sum_rate(channel, config) if robust else scheduler_sum_rate(channel, config)
    history = [
        (S, sr_eval(S)) for size in sizes for S in itertools.combinations(range(channel.K), size)
    ]
    best_S, best_sr = history[0]
    for S, sr in history[1:]:
        if sr > best_sr:
            best_S, best_sr = S, sr
    return ScheduleSelection(S_n=best_S, sr_estimate=best_sr, candidate_history=history)
