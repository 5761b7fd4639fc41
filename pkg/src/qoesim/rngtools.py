"""Deterministic named RNG substreams.

One master seed spawns independent substreams keyed by a stream name and
optional integer subkeys (user id, slot, ...).  Adding a new draw site
elsewhere never perturbs existing streams, which keeps replays bit-stable.
"""

from __future__ import annotations

import zlib

import numpy as np

# Fixed ids for the engine's draw sites; names are hashed so that the
# key space stays stable across releases.
STREAM_VIDEO_ARRIVALS = "video-arrivals"
STREAM_HP_ARRIVALS = "hp-arrivals"
STREAM_USER = "user"


def _name_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def substream(master_seed: int, name: str, *subkeys: int) -> np.random.Generator:
    """Generator for the substream ``(name, *subkeys)`` of ``master_seed``."""
    seq = np.random.SeedSequence(
        entropy=master_seed, spawn_key=(_name_key(name), *subkeys)
    )
    return np.random.default_rng(seq)
