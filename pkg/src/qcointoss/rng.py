"""Counter-based random numbers keyed by (seed, party, purpose, i, j).

Every draw is a pure function of its key, so sessions can be replayed and
split across workers without sharing generator state.  The mixing function is
the SplitMix64 finaliser; scalar and array draws use the same formula, so
``uniform(key, i, j) == uniforms(key, shape)[i, j]``.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _C1) & _MASK
    z = ((z ^ (z >> 27)) * _C2) & _MASK
    return z ^ (z >> 31)


def _code(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode())
    return int(part) & _MASK


def stream_key(seed: int, *parts) -> int:
    """Fold a seed and any number of str/int labels into a 64-bit stream key."""
    h = _mix(int(seed) + _GOLDEN)
    for part in parts:
        h = _mix(h ^ _mix(_code(part) + _GOLDEN))
    return h


def _counter(i: int, j: int) -> int:
    return ((i & 0xFFFFFFFF) << 32) | (j & 0xFFFFFFFF)


def draw(key: int, i: int = 0, j: int = 0) -> int:
    return _mix(key + _counter(i, j) * _GOLDEN)


def uniform(key: int, i: int = 0, j: int = 0) -> float:
    """Uniform float in [0, 1) with 53 random bits."""
    return (draw(key, i, j) >> 11) * (1.0 / (1 << 53))


def bit(key: int, i: int = 0, j: int = 0) -> int:
    return draw(key, i, j) >> 63


def _mix_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_C1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_C2)
    return z ^ (z >> np.uint64(31))


def draws(key: int, shape: tuple[int, int]) -> np.ndarray:
    """Array of raw 64-bit draws indexed by (i, j) for i < shape[0], j < shape[1]."""
    rows, cols = shape
    i = np.arange(rows, dtype=np.uint64)[:, None]
    j = np.arange(cols, dtype=np.uint64)[None, :]
    ctr = (i << np.uint64(32)) | j
    with np.errstate(over="ignore"):
        return _mix_np(np.uint64(key) + ctr * np.uint64(_GOLDEN))


def bits(key: int, shape: tuple[int, int]) -> np.ndarray:
    return (draws(key, shape) >> np.uint64(63)).astype(np.int64)


def derive_seed(base_seed: int, index: int) -> int:
    """Seed of trial ``index`` in a Monte Carlo run."""
    return stream_key(base_seed, "trial", index)
