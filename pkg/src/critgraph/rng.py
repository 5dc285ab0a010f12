"""Seeded random streams.

Every sampler takes either an integer seed or a ready ``numpy`` Generator.
Streams are Philox (counter based); replicate ``r`` of a campaign with master
seed ``s`` draws from the stream keyed by ``(s, r)`` so replicates can be
regenerated one at a time and in any order.
"""
from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF


def make_rng(seed=None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        return np.random.Generator(np.random.Philox())
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed) & _MASK64)))


def replicate_rng(master_seed: int, replicate: int, *tags: int) -> np.random.Generator:
    """Independent stream for one replicate; extra integer tags split it further."""
    key = [int(master_seed) & _MASK64, int(replicate), *map(int, tags)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def derive_seed(master_seed: int, replicate: int, *tags: int) -> int:
    """64-bit integer seed for replicate ``replicate`` (for APIs that want an int)."""
    ss = np.random.SeedSequence([int(master_seed) & _MASK64, int(replicate), *map(int, tags)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
