"""Derive independent RNG streams from one top-level seed plus labels."""
import zlib

import numpy as np


def _key(part):
    if isinstance(part, (int, np.integer)):
        return int(part)
    return zlib.crc32(str(part).encode("utf-8"))


def derive_seed_sequence(seed, *labels):
    return np.random.SeedSequence(int(seed), spawn_key=tuple(_key(p) for p in labels))


def derive_rng(seed, *labels):
    """Generator for ``(seed, *labels)``; the same arguments always give the same stream."""
    return np.random.Generator(np.random.PCG64(derive_seed_sequence(seed, *labels)))


def derive_int(seed, *labels):
    return int(derive_seed_sequence(seed, *labels).generate_state(1, np.uint32)[0])
