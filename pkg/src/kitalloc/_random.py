import hashlib

import numpy as np


def as_rng(seed):
    """Return a Generator for ``seed`` (int, None, SeedSequence or Generator)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def derive_seed(master, *parts):
    """Deterministic 63-bit sub-seed from a master seed and a tuple of tags.

    Hashing keeps sub-streams independent of each other, so adding a new
    consumer of randomness does not shift any existing stream.
    """
    h = hashlib.sha256(repr((int(master),) + tuple(parts)).encode())
    return int.from_bytes(h.digest()[:8], "little") & ((1 << 63) - 1)
