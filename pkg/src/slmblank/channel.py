"""AWGN plus Bernoulli-Gaussian impulsive noise on time-domain samples.

Variance parameters follow the convention ``sigma^2 = E[|x|^2] / 2``: each of
the real and imaginary parts is drawn with variance ``sigma^2``.
"""

from dataclasses import dataclass, field

import numpy as np

from slmblank.errors import ConfigurationError


@dataclass(frozen=True)
class ChannelParams:
    sbnr_db: float = 40.0
    sinr_db: float = -10.0
    p: float = 0.01
    sigma_w_sq: float = field(init=False)
    sigma_i_sq: float = field(init=False)

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ConfigurationError(f"impulse probability p={self.p} outside [0, 1]")
        # Unit signal power: SBNR = 10 log10(1 / sigma_w^2), same for SINR.
        object.__setattr__(self, "sigma_w_sq", 10.0 ** (-self.sbnr_db / 10.0))
        object.__setattr__(self, "sigma_i_sq", 10.0 ** (-self.sinr_db / 10.0))


@dataclass(frozen=True)
class ChannelRealization:
    received: np.ndarray
    impulse_mask: np.ndarray
    awgn: np.ndarray
    impulses: np.ndarray


def _complex_gaussian(shape, sigma_sq: float, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((2, *shape))
    return np.sqrt(sigma_sq) * (z[0] + 1j * z[1])


def _shape(n) -> tuple:
    return (n,) if np.ndim(n) == 0 else tuple(n)


def awgn_noise(n, sigma_w_sq: float, rng: np.random.Generator) -> np.ndarray:
    """Circularly-symmetric Gaussian noise; ``n`` is a length or a shape."""
    if sigma_w_sq < 0:
        raise ConfigurationError(f"negative noise variance {sigma_w_sq}")
    return _complex_gaussian(_shape(n), sigma_w_sq, rng)


def impulsive_noise(n, p: float, sigma_i_sq: float, rng: np.random.Generator):
    """Bernoulli(p) gated Gaussian impulses. Returns ``(impulses, mask)``."""
    if not 0.0 <= p <= 1.0:
        raise ConfigurationError(f"impulse probability p={p} outside [0, 1]")
    if sigma_i_sq < 0:
        raise ConfigurationError(f"negative impulse variance {sigma_i_sq}")
    shape = _shape(n)
    mask = rng.random(shape) < p
    g = _complex_gaussian(shape, sigma_i_sq, rng)
    return np.where(mask, g, 0.0 + 0.0j), mask


def transmit(
    signal: np.ndarray,
    params: ChannelParams,
    rng: np.random.Generator,
    impulse_rng: np.random.Generator | None = None,
) -> ChannelRealization:
    """Pass ``signal`` through the channel.

    AWGN is drawn from ``rng`` and impulses from ``impulse_rng`` (or ``rng``
    when not given), so callers can keep the two noise sources on separate
    streams.
    """
    signal = np.asarray(signal, dtype=np.complex128)
    if not np.all(np.isfinite(signal)):
        raise ConfigurationError("transmitted signal contains non-finite samples")
    w = awgn_noise(signal.shape, params.sigma_w_sq, rng)
    i, mask = impulsive_noise(
        signal.shape, params.p, params.sigma_i_sq, rng if impulse_rng is None else impulse_rng
    )
    return ChannelRealization(received=signal + w + i, impulse_mask=mask, awgn=w, impulses=i)
