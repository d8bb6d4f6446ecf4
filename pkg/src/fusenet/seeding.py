"""Named sub-seed derivation.

All randomness in a run flows from one master seed; each consumer
(split, init, synthgen, ...) derives its own independent stream by name
so that changing one stage never perturbs another.
"""

from __future__ import annotations

import hashlib

import numpy as np


def subseed(master: int, name: str) -> int:
    """Derive a stable 64-bit sub-seed from a master seed and a stream name."""
    digest = hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest()
    tag = int.from_bytes(digest, "little")
    mixed = hashlib.blake2b(
        master.to_bytes(8, "little", signed=False) + tag.to_bytes(8, "little"),
        digest_size=8,
    ).digest()
    return int.from_bytes(mixed, "little")


def rng_for(master: int, name: str) -> np.random.Generator:
    """Seeded generator for the named sub-stream."""
    return np.random.default_rng(subseed(master, name))
