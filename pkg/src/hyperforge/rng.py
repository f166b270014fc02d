"""Named random streams derived from one 64-bit seed.

Each consumer asks for its own stream by name, so adding a consumer never
shifts the draws seen by existing ones.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import InputError

U64 = (1 << 64) - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= U64:
        raise InputError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def _name_key(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "little")


def stream(seed: int, name: str) -> np.random.Generator:
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=(_name_key(name),))
    return np.random.Generator(np.random.PCG64(ss))
