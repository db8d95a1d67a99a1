"""Deterministic, tag-keyed random streams.

Every stochastic choice in the library draws from a generator obtained via
``rng_for(seed, *tags)``. Streams are independent per tag tuple and stable
across runs, platforms, and thread counts, which is what makes re-running a
stage with the same seed byte-identical.
"""

import hashlib

import numpy as np


def _tag_entropy(tags) -> list[int]:
    digest = hashlib.blake2b("\x1f".join(str(t) for t in tags).encode("utf-8"), digest_size=16).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


def rng_for(seed: int, *tags) -> np.random.Generator:
    """Generator keyed by (seed, tags); same key, same stream."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF] + _tag_entropy(tags))
    return np.random.Generator(np.random.PCG64(ss))
