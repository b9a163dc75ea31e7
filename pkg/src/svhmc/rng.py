"""Seeded random number stream shared by every sampler in a chain."""
from __future__ import annotations

import numpy as np


class RngStream:
    """Deterministic stream of uniform, normal and gamma variates.

    Backed by numpy's PCG64 bit generator, so a given seed produces the
    same draws on every platform for a fixed numpy version.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self._seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))

    @property
    def seed(self) -> int:
        return self._seed

    def uniform(self, size=None):
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)

    def normal(self, size=None):
        """Standard normal draws."""
        return self._gen.standard_normal(size)

    def gamma(self, shape: float, size=None):
        """Gamma draws with unit scale."""
        return self._gen.standard_gamma(shape, size)

    def __repr__(self):
        return f"RngStream(seed={self._seed})"
