"""Receiver blanking nonlinearity and the statistics-based optimized threshold.

The optimized threshold (OT) is ``INE / beta`` with ``INE = max - mean`` and
``beta = gamma - (median - mean)``, where max, mean and median are taken over
the magnitude envelope ``|r_k|`` of one received block.
"""

from dataclasses import dataclass

import numpy as np

from slmblank.errors import ConfigurationError, DegenerateThresholdError, InputShapeError

DEFAULT_GAMMA = 7.0


@dataclass(frozen=True)
class ThresholdSpec:
    mode: str = "optimized"
    t_fixed: float | None = None
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if self.mode == "fixed":
            if self.t_fixed is None or not self.t_fixed >= 0:
                raise ConfigurationError(f"fixed threshold must be >= 0, got {self.t_fixed}")
        elif self.mode == "optimized":
            if not self.gamma > 0:
                raise ConfigurationError(f"gamma must be > 0, got {self.gamma}")
        else:
            raise ConfigurationError(f"unknown threshold mode {self.mode!r}")

    @classmethod
    def fixed(cls, t: float) -> "ThresholdSpec":
        return cls(mode="fixed", t_fixed=t)

    @classmethod
    def optimized(cls, gamma: float = DEFAULT_GAMMA) -> "ThresholdSpec":
        return cls(mode="optimized", gamma=gamma)


@dataclass(frozen=True)
class EnvelopeStats:
    max: np.ndarray | float
    mean: np.ndarray | float
    median: np.ndarray | float


@dataclass(frozen=True)
class ThresholdEstimate:
    ot: np.ndarray | float
    ine: np.ndarray | float
    beta: np.ndarray | float
    stats: EnvelopeStats
    zero_threshold: np.ndarray | bool


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def envelope_stats(received: np.ndarray) -> EnvelopeStats:
    """Max, mean and median of ``|r_k|`` along the last axis."""
    a = np.abs(np.asarray(received))
    if a.ndim == 0 or a.shape[-1] == 0:
        raise InputShapeError("envelope statistics need a nonempty block")
    return EnvelopeStats(
        max=_scalar_or_array(a.max(axis=-1)),
        mean=_scalar_or_array(a.mean(axis=-1)),
        median=_scalar_or_array(np.median(a, axis=-1)),
    )


def threshold_from_stats(stats: EnvelopeStats, gamma: float) -> ThresholdEstimate:
    ine = np.asarray(stats.max) - np.asarray(stats.mean)
    beta = gamma - (np.asarray(stats.median) - np.asarray(stats.mean))
    if np.any(beta <= 0):
        raise DegenerateThresholdError(
            f"beta <= 0 (gamma={gamma} too small for the block statistics)"
        )
    ot = ine / beta
    zero = ot == 0
    return ThresholdEstimate(
        ot=_scalar_or_array(ot),
        ine=_scalar_or_array(ine),
        beta=_scalar_or_array(beta),
        stats=stats,
        zero_threshold=bool(zero) if np.ndim(zero) == 0 else zero,
    )


def estimate_ot(received: np.ndarray, gamma: float = DEFAULT_GAMMA) -> ThresholdEstimate:
    """Per-block optimized threshold. Raises when ``beta <= 0``."""
    if not gamma > 0:
        raise ConfigurationError(f"gamma must be > 0, got {gamma}")
    return threshold_from_stats(envelope_stats(received), gamma)


def blank(received: np.ndarray, t) -> np.ndarray:
    """Zero every sample with ``|r_k| > t``; samples at exactly ``t`` are kept.

    ``t`` may be a scalar or one threshold per block (shape ``(..., 1)`` or
    broadcastable against ``received``).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise ConfigurationError(f"blanking threshold must be >= 0, got {t}")
    r = np.asarray(received, dtype=np.complex128)
    return np.where(np.abs(r) <= t, r, 0.0 + 0.0j)


def blank_with_spec(received: np.ndarray, spec: ThresholdSpec):
    """Blank with the threshold ``spec`` describes; returns ``(blanked, applied)``."""
    if spec.mode == "fixed":
        applied = float(spec.t_fixed)
        return blank(received, applied), applied
    applied = estimate_ot(received, spec.gamma).ot
    t = applied if np.ndim(applied) == 0 else np.asarray(applied)[..., None]
    return blank(received, t), applied
