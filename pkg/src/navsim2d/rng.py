"""Deterministic seeded random numbers.

All procedural generation draws from SeededRng, a SplitMix64 counter
generator: output i is a bijective mix of ``seed + (i+1) * GAMMA`` over
64-bit integers. The stream depends only on (seed, draw index), so results
are identical across platforms, Python versions, and process/thread counts.

Subsystems never share a stream: child seeds are derived with
``split_seed(seed, tag, index)``, which hashes the parent seed together
with a subsystem tag string and an integer index.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    """SplitMix64 finalizer: a bijective avalanche mix of a 64-bit integer."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & _MASK
    return h


def split_seed(seed: int, tag: str, index: int = 0) -> int:
    """Derive an independent child seed from (seed, tag, index)."""
    z = (seed ^ _fnv1a64(tag.encode("utf-8"))) & _MASK
    z = _mix64(z)
    z = _mix64((z + (index & _MASK) * _GAMMA) & _MASK)
    return z


class SeededRng:
    """SplitMix64 stream seeded with a 64-bit integer."""

    __slots__ = ("seed", "_counter")

    def __init__(self, seed: int):
        self.seed = seed & _MASK
        self._counter = self.seed

    def u64(self) -> int:
        self._counter = (self._counter + _GAMMA) & _MASK
        return _mix64(self._counter)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("randrange bound must be positive")
        limit = (_MASK + 1) - ((_MASK + 1) % n)
        while True:
            v = self.u64()
            if v < limit:
                return v % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        return lo + self.randrange(hi - lo + 1)

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        """Fisher-Yates in place."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Box-Muller draw (two uniforms consumed)."""
        u1 = self.random()
        while u1 <= 0.0:
            u1 = self.random()
        u2 = self.random()
        return mu + sigma * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def spawn(self, tag: str, index: int = 0) -> "SeededRng":
        return SeededRng(split_seed(self.seed, tag, index))
