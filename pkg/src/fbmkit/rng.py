"""Seeding contract shared by every sampler.

Path ``i`` of a batch always draws from its own child stream ``i`` of the
root seed, so outputs do not depend on batch splitting or worker count.
"""

from __future__ import annotations

import secrets
from typing import Union

import numpy as np

SeedLike = Union[None, int, np.random.SeedSequence, np.random.Generator]


def fresh_seed() -> int:
    """A random 64-bit seed, for runs that must still record one."""
    return secrets.randbits(64)


def path_generators(rng: SeedLike, count: int) -> list:
    """One independent generator per path, in path order."""
    if isinstance(rng, np.random.Generator):
        return rng.spawn(count)
    ss = rng if isinstance(rng, np.random.SeedSequence) else np.random.SeedSequence(rng)
    return [np.random.Generator(np.random.PCG64(child)) for child in ss.spawn(count)]


def chunk_slices(count: int, chunk: int) -> list:
    return [slice(i, min(i + chunk, count)) for i in range(0, count, chunk)]
