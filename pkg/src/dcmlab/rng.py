"""Seed handling.

Every stochastic operation takes an explicit integer seed.  Independent
streams (replicates, the two sides of a coupling, worker partitions) are
derived with ``substream``, which maps (seed, *path) to a fresh PCG64
generator through numpy's SeedSequence spawn-key mechanism.  String path
components are hashed with crc32 so derivation is stable across runs and
platforms, unlike the builtin ``hash``.
"""

from __future__ import annotations

import zlib

import numpy as np


def _path_component(part) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("path components must be nonnegative")
        return int(part)
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    raise TypeError(f"unsupported path component {part!r}")


def substream(seed: int, *path) -> np.random.Generator:
    """Generator for the derived stream (seed, *path)."""
    key = tuple(_path_component(p) for p in path)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def salt64(seed: int, *path) -> int:
    """A 64-bit salt derived from (seed, *path), for hashing."""
    key = tuple(_path_component(p) for p in path)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return int(ss.generate_state(1, np.uint64)[0])
