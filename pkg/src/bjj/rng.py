"""Named random sub-streams derived from a single root seed.

``substream(seed, "synth", "shots")`` always yields the same generator, and
streams with different names are statistically independent. Names are hashed
with CRC-32 into the ``spawn_key`` of a :class:`numpy.random.SeedSequence`.
"""

from __future__ import annotations

import zlib

import numpy as np

MAX_SEED = 2**64 - 1


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValueError(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) <= MAX_SEED:
        raise ValueError(f"seed must lie in [0, 2**64 - 1], got {seed}")
    return int(seed)


def stream_key(*names: str) -> tuple:
    return tuple(zlib.crc32(name.encode("utf-8")) for name in names)


def substream(seed: int, *names: str) -> np.random.Generator:
    """Generator for the sub-stream ``names`` of root ``seed``."""
    seq = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=stream_key(*names))
    return np.random.Generator(np.random.PCG64(seq))
