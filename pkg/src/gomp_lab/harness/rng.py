"""Seeded random streams.

Every stream is a ``numpy.random.Generator`` over the counter-based
Philox4x64-10 bit generator.  The key is a ``SeedSequence`` built from
the 64-bit user seed plus a spawn key, so streams for different trials
or purposes are independent and can be drawn in any order or thread.
"""

from __future__ import annotations

import zlib

import numpy as np

BIT_GENERATOR = "Philox4x64-10"
MASK64 = (1 << 64) - 1


def _key(part):
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part) & MASK64


def seed_sequence(seed, *keys) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed) & MASK64, spawn_key=tuple(_key(k) for k in keys))


def make_rng(seed, *keys) -> np.random.Generator:
    """Generator for the stream identified by ``(seed, *keys)``."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *keys)))


def derive_seed(seed, *keys) -> int:
    """A 64-bit integer seed derived from ``(seed, *keys)``."""
    lo, hi = seed_sequence(seed, *keys).generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


def describe() -> dict:
    return {
        "bit_generator": BIT_GENERATOR,
        "numpy": np.__version__,
        "seed_derivation": "SeedSequence(entropy=seed, spawn_key=(trial_id,)) -> Philox",
    }
