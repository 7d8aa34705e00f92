"""Unitary radix-2 FFT, Gray-coded 16-QAM and OFDM (de)modulation.

Signals are plain complex numpy arrays. Every function operates along the
last axis, so a stack of blocks with shape ``(..., N)`` is processed in one
call.
"""

from functools import lru_cache

import numpy as np

from slmblank.errors import ConfigurationError, InputShapeError

QAM16_SCALE = 1.0 / np.sqrt(10.0)

# Gray map on one axis: bit pair (hi, lo) -> amplitude level.
_GRAY_LEVEL = {(0, 0): -3.0, (0, 1): -1.0, (1, 1): 1.0, (1, 0): 3.0}
# Index by 2*hi + lo.
_PAIR_TO_LEVEL = np.array([_GRAY_LEVEL[(h, l)] for h in (0, 1) for l in (0, 1)])
# Level rank (-3, -1, +1, +3 -> 0..3) back to the bit pair.
_RANK_TO_PAIR = np.array([[0, 0], [0, 1], [1, 1], [1, 0]], dtype=np.uint8)


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _check_length(n: int) -> None:
    if not is_power_of_two(n):
        raise ConfigurationError(f"transform length {n} is not a power of two")


@lru_cache(maxsize=None)
def _bit_reverse_permutation(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=None)
def _twiddles(m: int, sign: int) -> np.ndarray:
    k = np.arange(m // 2)
    w = np.exp(sign * 2j * np.pi * k / m)
    # Snap the quarter-turn points so the trivial rotations are exact.
    q = m // 4
    if q:
        w[0] = 1.0
        w[q] = sign * 1j
    w.setflags(write=False)
    return w


def _radix2(x: np.ndarray, sign: int) -> np.ndarray:
    """Iterative decimation-in-time butterflies; ``sign=-1`` forward, ``+1`` inverse."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    _check_length(n)
    lead = x.shape[:-1]
    y = x[..., _bit_reverse_permutation(n)]
    m = 2
    while m <= n:
        half = m // 2
        blocks = y.reshape(*lead, n // m, m)
        even = blocks[..., :half]
        odd = blocks[..., half:] * _twiddles(m, sign)
        y = np.concatenate((even + odd, even - odd), axis=-1).reshape(*lead, n)
        m *= 2
    return y / np.sqrt(n)


def fft(x: np.ndarray) -> np.ndarray:
    """Unitary forward DFT along the last axis."""
    return _radix2(x, -1)


def ifft(x: np.ndarray) -> np.ndarray:
    """Unitary inverse DFT along the last axis."""
    return _radix2(x, +1)


def ofdm_modulate(block: np.ndarray) -> np.ndarray:
    """Subcarrier symbols ``S_k`` to time samples ``s_t = N^-1/2 sum_k S_k e^{j2pi kt/N}``."""
    return ifft(block)


def ofdm_demodulate(block: np.ndarray) -> np.ndarray:
    return fft(block)


def qam16_modulate(bits) -> np.ndarray:
    """Map bits to unit-average-power 16-QAM symbols.

    Each group ``b3 b2 b1 b0`` (first bit is ``b3``) takes its in-phase level
    from ``(b3, b2)`` and its quadrature level from ``(b1, b0)``.
    """
    bits = np.asarray(bits)
    if bits.shape[-1] % 4:
        raise InputShapeError(f"bit count {bits.shape[-1]} is not divisible by 4")
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise InputShapeError("bits must be 0 or 1")
    b = bits.astype(np.intp).reshape(*bits.shape[:-1], -1, 4)
    i_level = _PAIR_TO_LEVEL[2 * b[..., 0] + b[..., 1]]
    q_level = _PAIR_TO_LEVEL[2 * b[..., 2] + b[..., 3]]
    return (i_level + 1j * q_level) * QAM16_SCALE


def _slice_axis(v: np.ndarray) -> np.ndarray:
    # Decision boundaries at -2, 0, +2 in unscaled units.
    rank = np.floor((v / QAM16_SCALE + 4.0) / 2.0)
    return np.clip(rank, 0, 3).astype(np.intp)


def qam16_demodulate(block: np.ndarray) -> np.ndarray:
    """Hard nearest-point decisions; returns ``4 * N`` bits per block."""
    block = np.asarray(block, dtype=np.complex128)
    i_pair = _RANK_TO_PAIR[_slice_axis(block.real)]
    q_pair = _RANK_TO_PAIR[_slice_axis(block.imag)]
    bits = np.concatenate((i_pair, q_pair), axis=-1)
    return bits.reshape(*block.shape[:-1], -1)


def qam16_constellation() -> tuple[np.ndarray, np.ndarray]:
    """All 16 points with their generating bit patterns, in pattern order 0000..1111."""
    patterns = ((np.arange(16)[:, None] >> np.arange(3, -1, -1)) & 1).astype(np.uint8)
    return qam16_modulate(patterns).ravel(), patterns
