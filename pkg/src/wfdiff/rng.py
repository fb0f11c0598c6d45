"""Deterministic counter-based random number generation.

The generator is splitmix64 used in counter mode: draw i of a stream seeded
with s is ``mix64(s + (i+1) * GAMMA)`` where GAMMA is the 64-bit golden-ratio
increment. Every draw is a pure function of (seed, counter), so sequences are
reproducible bit-for-bit across platforms and whole blocks can be produced
with vectorized integer arithmetic. Gaussian variates come from Box-Muller,
which only needs IEEE-754 double ops and is therefore equally reproducible.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U53 = 1.0 / float(1 << 53)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class Rng:
    """Deterministic stream of uniforms/normals identified by a 64-bit seed."""

    def __init__(self, seed: int):
        self.seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        self._counter = 0

    def _raw(self, n: int) -> np.ndarray:
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        with np.errstate(over="ignore"):
            return _mix64(self.seed + idx * _GAMMA)

    def uniform(self, shape=()) -> np.ndarray:
        """Uniform draws in [0, 1) with 53 random mantissa bits."""
        n = int(np.prod(shape)) if shape else 1
        u = (self._raw(n) >> np.uint64(11)).astype(np.float64) * _U53
        return u.reshape(shape) if shape else u[0]

    def normal(self, shape=()) -> np.ndarray:
        """Standard normal draws via Box-Muller."""
        n = int(np.prod(shape)) if shape else 1
        m = (n + 1) // 2
        raw = self._raw(2 * m)
        # u1 in (0, 1] so log() is finite.
        u1 = ((raw[:m] >> np.uint64(11)).astype(np.float64) + 1.0) * _U53
        u2 = (raw[m:] >> np.uint64(11)).astype(np.float64) * _U53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        return z.reshape(shape) if shape else z[0]

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] (inclusive)."""
        if hi < lo:
            raise ValueError("empty range")
        span = np.uint64(hi - lo + 1)
        return lo + int(self._raw(1)[0] % span)

    def spawn(self, tag: int) -> "Rng":
        """Derive an independent child stream; deterministic in (seed, tag)."""
        with np.errstate(over="ignore"):
            child = _mix64(self.seed ^ _mix64(np.uint64(tag) * _GAMMA + _GAMMA))
        return Rng(int(child))
