"""Named random streams derived from one user-visible seed."""

import zlib

import numpy as np


def stream_key(name: str) -> int:
    """Stable integer key for a stream name."""
    return zlib.crc32(name.encode("utf-8"))


def named_rng(seed: int, name: str) -> np.random.Generator:
    """
    Return the generator of stream `name` under `seed`.

    Parameters:
        seed (int): User-visible seed
        name (str): Stream name (init, data, dropout, split, generator, ...)

    Returns:
        np.random.Generator: Independent PCG64 generator
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), stream_key(name)]))


def stable_bucket(seed: int, key: str, buckets: int) -> int:
    """Seed-deterministic hash bucket of a string key."""
    return zlib.crc32(f"{seed}:{key}".encode("utf-8")) % buckets
