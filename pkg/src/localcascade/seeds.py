"""Deterministic 64-bit seed derivation.

Per-unit seeds (per tree, per node) are derived from (base seed, index) with a
splitmix64 round, so results never depend on scheduling or degree of
parallelism: unit i always receives the same seed.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


def mix_seed(seed: int, index: int) -> int:
    """splitmix64 finalizer applied to seed advanced by (index + 1) steps."""
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SeedStream:
    """Hands out mix_seed(seed, 0), mix_seed(seed, 1), ... one per call."""

    def __init__(self, seed: int):
        self._seed = seed
        self._next = 0

    def next(self) -> int:
        value = mix_seed(self._seed, self._next)
        self._next += 1
        return value
