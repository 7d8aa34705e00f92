"""Selective mapping: phase-rotated candidates and minimum-PAPR selection."""

from dataclasses import dataclass

import numpy as np

from slmblank.errors import ConfigurationError, InputShapeError, UndefinedPaprError
from slmblank.signal_core import ofdm_modulate

PHASE_ALPHABET = np.array([1.0, -1.0, 1j, -1j], dtype=np.complex128)

# Spawn-key prefix that keeps phase-vector draws apart from trial streams.
_PHASE_DOMAIN = 0x534C4D


@dataclass(frozen=True)
class PhaseVectorSet:
    vectors: np.ndarray  # (U, N), unit-modulus
    seed: int

    @property
    def u_count(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    def head(self, u_count: int) -> "PhaseVectorSet":
        """First ``u_count`` vectors; equal to regenerating with the same seed."""
        if not 1 <= u_count <= self.u_count:
            raise ConfigurationError(f"u_count {u_count} outside 1..{self.u_count}")
        return PhaseVectorSet(self.vectors[:u_count], self.seed)


@dataclass(frozen=True)
class SlmSelection:
    signal: np.ndarray
    chosen_index: np.ndarray | int
    papr: np.ndarray | float
    candidate_paprs: np.ndarray


def generate_phase_vectors(u_count: int, n: int, seed: int) -> PhaseVectorSet:
    """Vector 0 is all ones; vector u >= 1 is drawn from its own seeded stream.

    Because each vector depends only on ``(seed, u)``, sets generated with the
    same seed are nested: the first U' vectors never depend on U.
    """
    if u_count < 1:
        raise ConfigurationError(f"u_count must be >= 1, got {u_count}")
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    vectors = np.ones((u_count, n), dtype=np.complex128)
    for u in range(1, u_count):
        ss = np.random.SeedSequence(seed, spawn_key=(_PHASE_DOMAIN, u))
        rng = np.random.Generator(np.random.PCG64(ss))
        vectors[u] = PHASE_ALPHABET[rng.integers(0, 4, size=n)]
    vectors.setflags(write=False)
    return PhaseVectorSet(vectors, seed)


def papr(signal: np.ndarray) -> np.ndarray | float:
    """Peak-to-average power ratio (linear) along the last axis."""
    power = np.abs(np.asarray(signal)) ** 2
    mean = power.mean(axis=-1)
    if np.any(mean == 0):
        raise UndefinedPaprError("PAPR of an all-zero signal is undefined")
    ratio = power.max(axis=-1) / mean
    return float(ratio) if np.ndim(ratio) == 0 else ratio


def slm_select(block: np.ndarray, vectors: PhaseVectorSet) -> SlmSelection:
    """Transmit candidate with the lowest PAPR; ties go to the lowest index.

    ``block`` may be a single symbol ``(N,)`` or a stack ``(B, N)``.
    """
    block = np.asarray(block, dtype=np.complex128)
    if block.shape[-1] != vectors.n:
        raise InputShapeError(
            f"block length {block.shape[-1]} != phase vector length {vectors.n}"
        )
    candidates = ofdm_modulate(block[..., None, :] * vectors.vectors)
    paprs = papr(candidates)
    paprs = np.asarray(paprs)
    best = np.argmin(paprs, axis=-1)
    signal = np.take_along_axis(candidates, best[..., None, None], axis=-2)[..., 0, :]
    best_papr = np.take_along_axis(paprs, best[..., None], axis=-1)[..., 0]
    if block.ndim == 1:
        return SlmSelection(signal, int(best), float(best_papr), paprs)
    return SlmSelection(signal, best, best_papr, paprs)


def slm_derotate(block: np.ndarray, vectors: PhaseVectorSet, chosen_index) -> np.ndarray:
    """Undo the rotation of the chosen candidate in the frequency domain."""
    idx = np.asarray(chosen_index)
    if np.any(idx < 0) or np.any(idx >= vectors.u_count):
        raise InputShapeError(f"chosen_index {chosen_index} outside 0..{vectors.u_count - 1}")
    return np.asarray(block) * np.conj(vectors.vectors[idx])
