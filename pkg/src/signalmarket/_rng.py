"""Deterministic random-stream derivation.

Every stochastic routine derives its generator from (master seed, tag, ...)
so that results are reproducible and independent of evaluation order. Tags
are hashed with crc32, which is stable across platforms and sessions
(unlike the builtin hash).
"""

from __future__ import annotations

import zlib

import numpy as np


def substream(seed: int, *tags) -> np.random.Generator:
    """Return an independent Generator keyed by the master seed and tags."""
    key = tuple(zlib.crc32(str(t).encode("utf-8")) for t in tags)
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=key))
