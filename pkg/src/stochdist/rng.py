"""Seeded random streams.

Every random quantity in the package is drawn from a Philox generator whose
key is derived from ``(master_seed, tag, index)`` by hashing, so sub-streams
for different purposes (realizations, protocol coins, per-vertex
hallucinations, Monte-Carlo trials) never overlap and never need coordination.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(master_seed: int, tag: str, index: int = 0) -> int:
    """Derive a 64-bit seed for sub-stream ``(tag, index)`` of ``master_seed``."""
    key = f"{int(master_seed) & _MASK64}:{tag}:{int(index)}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def generator(seed: int) -> np.random.Generator:
    """Counter-based generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(int(seed) & _MASK64))


def stream(master_seed: int, tag: str, index: int = 0) -> np.random.Generator:
    return generator(derive_seed(master_seed, tag, index))
