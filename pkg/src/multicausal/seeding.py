"""Counter-based random streams derived from one 64-bit seed."""
from __future__ import annotations

import numpy as np

__all__ = ["rng_for", "SeedStream"]


def rng_for(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, key...)``; same inputs, same stream."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


class SeedStream:
    """Hands out generators ``rng_for(seed, 0)``, ``rng_for(seed, 1)``, ..."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.counter = 0

    def next(self) -> np.random.Generator:
        rng = rng_for(self.seed, self.counter)
        self.counter += 1
        return rng
