"""Deterministic, counter-based randomness.

Every stochastic operation in the package takes an explicit Rng. Two Rng
objects built from the same seed produce bit-identical streams, and child
streams derived with the same tags are likewise reproducible.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _mix(seed: int, tag: int) -> int:
    # splitmix64 finalizer; decorrelates child seeds from sequential tags
    z = (seed + 0x9E3779B97F4A7C15 * (tag + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


class Rng:
    """Counter-based PRNG stream (Philox) with a 64-bit seed.

    Single-owner: share the seed, not the object.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def child(self, tag: int) -> "Rng":
        """Derive an independent stream; same (seed, tag) -> same stream."""
        return Rng(_mix(self.seed, int(tag)))

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def choice_weighted(self, n: int, weights, size: int):
        """Indices in [0, n) drawn with the given probabilities."""
        return self._gen.choice(n, size=size, p=np.asarray(weights, dtype=float))
