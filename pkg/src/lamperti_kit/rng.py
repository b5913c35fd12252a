"""Deterministic stream construction.

Every random draw in the toolkit flows from a counter-based Philox generator
keyed by (seed, replication, *stream tags).  Streams for distinct keys are
independent and do not share state, so replications can run in any order or
thread and still reproduce bit-identically.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["make_rng", "derive_seed"]

_U64 = (1 << 64) - 1


def _tag_entropy(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        return int(tag) & _U64
    # stable across processes/runs (unlike hash())
    return zlib.crc32(str(tag).encode("utf-8"))


def make_rng(seed: int, replication: int = 0, *tags) -> np.random.Generator:
    """Generator for the stream (seed, replication, *tags)."""
    entropy = [int(seed) & _U64, int(replication) & _U64]
    entropy.extend(_tag_entropy(t) for t in tags)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, *tags) -> int:
    """Sub-seed for a named experiment; stable across runs and platforms."""
    entropy = [int(seed) & _U64]
    entropy.extend(_tag_entropy(t) for t in tags)
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
