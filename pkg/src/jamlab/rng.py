"""Per-replication random streams.

Replication ``i`` under master seed ``s`` draws from PCG64 seeded by
``SeedSequence(s, spawn_key=(i,))``.  SeedSequence hashes the pair through
its avalanche mixer, so streams for distinct indices are independent in
practice, and each stream depends only on ``(s, i)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_SEED = 20080101
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngSpec:
    seed: int
    replication: int = 0

    def __post_init__(self):
        if self.replication < 0:
            raise ValueError(f"replication index must be >= 0, got {self.replication}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed & _MASK64, spawn_key=(self.replication,))
        return np.random.Generator(np.random.PCG64(ss))


def exponentials(rng: np.random.Generator, size: int) -> np.ndarray:
    """Unit-rate exponential variates by inverse transform of U in [0, 1)."""
    u = rng.random(size)
    return -np.log1p(-u)
