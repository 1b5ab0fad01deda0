"""Simulation parameters and experiment specifications.

Both containers are frozen dataclasses. ``ExperimentSpec.from_dict`` is the
single entry point for JSON config files and rejects unknown keys.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError

EXHAUSTIVE_LIMIT = 100_000


class LsfMode(str, enum.Enum):
    UNIFORM = "Uniform"
    LOG_DISTANCE = "LogDistance"


class Scheduler(str, enum.Enum):
    CESG = "CESG"
    RCESG = "RCESG"
    EXHAUSTIVE = "EXHAUSTIVE"


class PowerAllocator(str, enum.Enum):
    EPL = "EPL"
    GDPA = "GDPA"
    RGDPA = "RGDPA"


class CsiMode(str, enum.Enum):
    PERFECT = "PERFECT"
    IMPERFECT = "IMPERFECT"


@dataclass(frozen=True)
class NetworkConfig:
    """Scalar parameters of one cell-free network setup.

    ``P_budget=None`` resolves to ``n`` (one unit of power per stream).
    """

    M: int = 64
    K: int = 32
    n: int = 16
    rho_f: float = 1.0
    sigma_w2: float = 1.0
    P_budget: float | None = None
    alpha: float = 0.15
    alpha_min: float = 0.05
    alpha_max: float = 0.3
    seed: int = 0
    trials: int = 100

    def __post_init__(self):
        if self.P_budget is None:
            object.__setattr__(self, "P_budget", float(self.n))
        self.validate()

    def validate(self) -> None:
        for name in ("M", "K", "n", "trials"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if self.n > self.M or self.n > self.K:
            raise ConfigError(f"need n <= M and n <= K (n={self.n}, M={self.M}, K={self.K})")
        if not (math.isfinite(self.rho_f) and self.rho_f >= 0):
            raise ConfigError(f"rho_f must be finite and >= 0, got {self.rho_f}")
        if not (math.isfinite(self.sigma_w2) and self.sigma_w2 > 0):
            raise ConfigError(f"sigma_w2 must be > 0, got {self.sigma_w2}")
        if not (math.isfinite(self.P_budget) and self.P_budget > 0):
            raise ConfigError(f"P_budget must be > 0, got {self.P_budget}")
        if not (0 < self.alpha_min <= self.alpha_max < 1):
            raise ConfigError(
                f"need 0 < alpha_min <= alpha_max < 1, got [{self.alpha_min}, {self.alpha_max}]"
            )
        if not (0 <= self.alpha <= 1):
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")

    def replace(self, **changes) -> "NetworkConfig":
        return dataclasses.replace(self, **changes)


def _enum_tuple(cls, values, name):
    if isinstance(values, (str, bytes)) or not values:
        raise ConfigError(f"{name} must be a nonempty list")
    try:
        out = tuple(cls(v) for v in values)
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None
    if len(set(out)) != len(out):
        raise ConfigError(f"{name} contains duplicates")
    return out


@dataclass(frozen=True)
class ExperimentSpec:
    config: NetworkConfig = field(default_factory=NetworkConfig)
    snr_grid_db: tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    schedulers: tuple[Scheduler, ...] = (Scheduler.CESG, Scheduler.RCESG)
    power_allocators: tuple[PowerAllocator, ...] = (PowerAllocator.EPL,)
    csi_modes: tuple[CsiMode, ...] = (CsiMode.PERFECT, CsiMode.IMPERFECT)
    lsf_mode: LsfMode = LsfMode.LOG_DISTANCE
    output_path: str = "results.csv"
    # gradient power allocation: step size, iteration count I_D
    pa_step: float = 0.01
    pa_iterations: int = 100

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not isinstance(self.config, NetworkConfig):
            raise ConfigError("config must be a NetworkConfig")
        if not self.snr_grid_db:
            raise ConfigError("snr_grid_db must be nonempty")
        if not all(math.isfinite(s) for s in self.snr_grid_db):
            raise ConfigError("snr_grid_db entries must be finite")
        if len(set(self.snr_grid_db)) != len(self.snr_grid_db):
            raise ConfigError("snr_grid_db contains duplicates")
        for name in ("schedulers", "power_allocators", "csi_modes"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be nonempty")
        if Scheduler.EXHAUSTIVE in self.schedulers:
            count = sum(math.comb(self.config.K, s) for s in range(1, self.config.n + 1))
            if count > EXHAUSTIVE_LIMIT:
                raise ConfigError(
                    f"EXHAUSTIVE needs at most {EXHAUSTIVE_LIMIT} candidate sets, K={self.config.K}, n={self.config.n} gives {count}"
                )
        if not (math.isfinite(self.pa_step) and self.pa_step > 0):
            raise ConfigError(f"pa_step must be > 0, got {self.pa_step}")
        if isinstance(self.pa_iterations, bool) or not isinstance(self.pa_iterations, int) or self.pa_iterations < 1:
            raise ConfigError(f"pa_iterations must be a positive integer, got {self.pa_iterations!r}")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentSpec":
        if not isinstance(data, dict):
            raise ConfigError("experiment config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown experiment keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "config" in kwargs:
            net = kwargs["config"]
            if not isinstance(net, dict):
                raise ConfigError("config must be a JSON object")
            net_known = {f.name for f in dataclasses.fields(NetworkConfig)}
            bad = set(net) - net_known
            if bad:
                raise ConfigError(f"unknown config keys: {sorted(bad)}")
            try:
                kwargs["config"] = NetworkConfig(**net)
            except TypeError as exc:
                raise ConfigError(str(exc)) from None
        if "snr_grid_db" in kwargs:
            grid = kwargs["snr_grid_db"]
            if isinstance(grid, (str, bytes)) or not isinstance(grid, (list, tuple)):
                raise ConfigError("snr_grid_db must be a list of numbers")
            try:
                kwargs["snr_grid_db"] = tuple(float(s) for s in grid)
            except (TypeError, ValueError):
                raise ConfigError("snr_grid_db must be a list of numbers") from None
        for name, enum_cls in (
            ("schedulers", Scheduler),
            ("power_allocators", PowerAllocator),
            ("csi_modes", CsiMode),
        ):
            if name in kwargs:
                kwargs[name] = _enum_tuple(enum_cls, kwargs[name], name)
        if "lsf_mode" in kwargs:
            try:
                kwargs["lsf_mode"] = LsfMode(kwargs["lsf_mode"])
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if "output_path" in kwargs and not isinstance(kwargs["output_path"], str):
            raise ConfigError("output_path must be a string")
        if "pa_step" in kwargs:
            try:
                kwargs["pa_step"] = float(kwargs["pa_step"])
            except (TypeError, ValueError):
                raise ConfigError("pa_step must be a number") from None
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentSpec":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": dataclasses.asdict(self.config),
            "snr_grid_db": list(self.snr_grid_db),
            "schedulers": [s.value for s in self.schedulers],
            "power_allocators": [p.value for p in self.power_allocators],
            "csi_modes": [c.value for c in self.csi_modes],
            "lsf_mode": self.lsf_mode.value,
            "output_path": self.output_path,
            "pa_step": self.pa_step,
            "pa_iterations": self.pa_iterations,
        }

    def replace(self, **changes) -> "ExperimentSpec":
        return dataclasses.replace(self, **changes)
