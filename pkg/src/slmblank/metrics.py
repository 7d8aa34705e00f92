"""Output SNR as a ratio of accumulated energies, and relative gain in dB."""

import math
from dataclasses import dataclass

import numpy as np

from slmblank.errors import ConfigurationError, InputShapeError


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    if x == math.inf:
        return math.inf
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class SnrMeasurement:
    signal_energy: float = 0.0
    error_energy: float = 0.0
    sample_count: int = 0

    def __add__(self, other: "SnrMeasurement") -> "SnrMeasurement":
        return SnrMeasurement(
            self.signal_energy + other.signal_energy,
            self.error_energy + other.error_energy,
            self.sample_count + other.sample_count,
        )

    @property
    def linear(self) -> float:
        if self.sample_count == 0:
            raise ConfigurationError("SNR of an empty measurement is undefined")
        if self.error_energy == 0:
            return math.inf
        return self.signal_energy / self.error_energy


def measure(transmitted: np.ndarray, blanked: np.ndarray) -> SnrMeasurement:
    s = np.asarray(transmitted)
    y = np.asarray(blanked)
    if s.shape != y.shape:
        raise InputShapeError(f"shape mismatch: transmitted {s.shape} vs blanked {y.shape}")
    return SnrMeasurement(
        float(np.sum(np.abs(s) ** 2)),
        float(np.sum(np.abs(y - s) ** 2)),
        s.size,
    )


def accumulate_snr(meas: SnrMeasurement, transmitted, blanked) -> SnrMeasurement:
    return meas + measure(transmitted, blanked)


def snr_db(meas: SnrMeasurement) -> float:
    """``10 log10(sum |s|^2 / sum |y - s|^2)``; ``math.inf`` when nothing was lost."""
    return linear_to_db(meas.linear)


def relative_gain_db(snr_u: float, snr_unmod: float) -> float:
    if not (snr_u > 0 and snr_unmod > 0):
        raise ConfigurationError(f"SNRs must be positive, got {snr_u}, {snr_unmod}")
    if snr_u == snr_unmod:
        return 0.0
    if math.isinf(snr_u) or math.isinf(snr_unmod):
        return math.inf if math.isinf(snr_u) else -math.inf
    # Difference of logs keeps gain(a, b) == -gain(b, a) exactly.
    return 10.0 * (math.log10(snr_u) - math.log10(snr_unmod))
