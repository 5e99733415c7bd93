"""Fixed-width 64-bit generator with a fully specified output stream.

The generator is SplitMix64 used in counter mode.  Word ``i`` (0-based) of
the stream started from ``seed`` is::

    z = (seed + (i + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB  mod 2**64
    word_i = z ^ (z >> 31)

This is the same sequence the usual sequential SplitMix64 produces, but any
slice of it can be computed directly, which is what lets sampling run in
chunks (or in parallel) without changing a single bit of output.

Bounded integers in ``[0, m)`` are ``floor(word * m / 2**64)`` (the high
word of the 128-bit product).  No rejection step is used, so the bias per
draw is below ``m / 2**64``.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = 0xFFFF_FFFF_FFFF_FFFF
GAMMA = 0x9E37_79B9_7F4A_7C15
_MUL1 = 0xBF58_476D_1CE4_E5B9
_MUL2 = 0x94D0_49BB_1331_11EB
_LO32 = np.uint64(0xFFFF_FFFF)


def mix64(z: int) -> int:
    """SplitMix64 finaliser on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, tag: int) -> int:
    """Child seed for an independent stream, ``mix64(seed ^ tag)``."""
    return mix64((seed ^ tag) & MASK64)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
    return z ^ (z >> np.uint64(31))


def stream_words(seed: int, start: int, count: int) -> np.ndarray:
    """Words ``start .. start+count-1`` of the stream for ``seed``."""
    if count < 0 or start < 0:
        raise ValueError("start and count must be non-negative")
    base = np.uint64((seed + (start + 1) * GAMMA) & MASK64)
    steps = np.arange(count, dtype=np.uint64) * np.uint64(GAMMA)
    return _mix64_array(steps + base)


def mulhi64(words: np.ndarray, m: int) -> np.ndarray:
    """High 64 bits of ``words * m`` for ``0 < m < 2**64``."""
    if not 0 < m <= MASK64:
        raise ValueError(f"bound {m} outside (0, 2**64)")
    a_lo = words & _LO32
    a_hi = words >> np.uint64(32)
    b_lo = np.uint64(m & 0xFFFF_FFFF)
    b_hi = np.uint64(m >> 32)
    lo_lo = a_lo * b_lo
    hi_lo = a_hi * b_lo
    lo_hi = a_lo * b_hi
    cross = (lo_lo >> np.uint64(32)) + (hi_lo & _LO32) + lo_hi
    return a_hi * b_hi + (hi_lo >> np.uint64(32)) + (cross >> np.uint64(32))


def bounded(words: np.ndarray, m: int) -> np.ndarray:
    """Map words to integers in ``[0, m)``."""
    if m == 1:
        return np.zeros(words.shape, dtype=np.uint64)
    return mulhi64(words, m)


def unit_doubles(words: np.ndarray) -> np.ndarray:
    """Top 53 bits as a double in ``[0, 1)``."""
    return (words >> np.uint64(11)).astype(np.float64) * 2.0**-53


class SplitMix64:
    """Sequential view of the stream, tracking the next word index."""

    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ValueError("seed must fit in 64 bits")
        self.seed = seed
        self.position = 0

    def next_u64(self) -> int:
        self.position += 1
        return mix64(self.seed + self.position * GAMMA)

    def words(self, count: int) -> np.ndarray:
        out = stream_words(self.seed, self.position, count)
        self.position += count
        return out

    def standard_normals(self, count: int) -> np.ndarray:
        """Box-Muller normals, one per consecutive word pair (cosine branch)."""
        w = self.words(2 * count)
        u1 = ((w[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
        u2 = unit_doubles(w[1::2])
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)
