"""Large-scale fading and imperfect-CSI channel realizations.

Every channel coefficient splits into an estimate and an estimation error,

    g_mk = sqrt(1 - alpha) * sqrt(beta_mk) * h_mk + sqrt(alpha) * sqrt(beta_mk) * h~_mk,

with h, h~ i.i.d. CN(0, 1). ``ChannelSet`` keeps the scaled small-scale parts
U = sqrt(beta) * h and V = sqrt(beta) * h~ so that robust schedulers can
re-evaluate the channel norm at any alpha.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import LsfMode, NetworkConfig

AREA_SIDE_M = 1000.0
MIN_DISTANCE_M = 10.0
PATHLOSS_EXPONENT = 3.5
SHADOWING_STD_DB = 8.0


@dataclass(frozen=True)
class ErrorBounds:
    """Bounds beta_lo <= ||g~_k||^2 <= beta_hi on one UE's error power."""

    beta_lo: float
    beta_hi: float


@dataclass(frozen=True, eq=False)
class ChannelSet:
    U: np.ndarray
    V: np.ndarray
    B: np.ndarray
    alpha: float

    @property
    def M(self) -> int:
        return self.U.shape[0]

    @property
    def K(self) -> int:
        return self.U.shape[1]

    @property
    def G_hat(self) -> np.ndarray:
        return np.sqrt(1.0 - self.alpha) * self.U

    @property
    def G_tilde(self) -> np.ndarray:
        return np.sqrt(self.alpha) * self.V

    @property
    def G(self) -> np.ndarray:
        """True channel, recomputed as estimate plus error."""
        return self.G_hat + self.G_tilde

    def with_alpha(self, alpha: float) -> "ChannelSet":
        return ChannelSet(self.U, self.V, self.B, float(alpha))

    def perfect(self) -> "ChannelSet":
        """The same realization with no estimation error at all (alpha = 0, V = 0)."""
        return ChannelSet(self.U, np.zeros_like(self.V), self.B, 0.0)


def generate_lsf(config: NetworkConfig, mode: LsfMode | str = LsfMode.UNIFORM, rng=None) -> np.ndarray:
    """M x K large-scale fading matrix.

    ``LogDistance`` drops APs and UEs uniformly in a 1 km square, applies
    d^-3.5 path loss (d >= 10 m) with 8 dB log-normal shadowing and
    normalizes the largest coefficient to 1. ``rng`` defaults to a generator
    seeded with ``config.seed``.
    """
    mode = LsfMode(mode)
    M, K = config.M, config.K
    if mode is LsfMode.UNIFORM:
        return np.ones((M, K))
    if rng is None:
        rng = np.random.default_rng(config.seed)
    ap_pos = rng.uniform(0.0, AREA_SIDE_M, size=(M, 2))
    ue_pos = rng.uniform(0.0, AREA_SIDE_M, size=(K, 2))
    dist = np.linalg.norm(ap_pos[:, None, :] - ue_pos[None, :, :], axis=-1)
    dist = np.maximum(dist, MIN_DISTANCE_M)
    shadow_db = rng.normal(0.0, SHADOWING_STD_DB, size=(M, K))
    # work in dB to avoid underflow before normalization
    gain_db = -10.0 * PATHLOSS_EXPONENT * np.log10(dist) + shadow_db
    return 10.0 ** ((gain_db - gain_db.max()) / 10.0)


def _cn(rng, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_channel(B: np.ndarray, alpha: float, rng) -> ChannelSet:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    B = np.asarray(B, dtype=float)
    sqrt_b = np.sqrt(B)
    h = _cn(rng, B.shape)
    h_err = _cn(rng, B.shape)
    return ChannelSet(U=sqrt_b * h, V=sqrt_b * h_err, B=B, alpha=float(alpha))


def alpha_range_to_bounds(channel: ChannelSet, k: int, alpha_min: float, alpha_max: float) -> ErrorBounds:
    # ||g~_k||^2 = alpha * ||v_k||^2, so the norm bounds are linear in alpha
    b_k = float(np.vdot(channel.V[:, k], channel.V[:, k]).real)
    return ErrorBounds(beta_lo=alpha_min * b_k, beta_hi=alpha_max * b_k)
