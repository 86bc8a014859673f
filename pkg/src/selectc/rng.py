"""Seed derivation for the toolkit's split random streams.

Every randomized pass takes one user-facing seed and derives independent
child streams from it by hashing the seed together with a short label.
Consumers that must not disturb each other (option generation, fake
chains, permutations) each get their own child, so toggling one feature
never shifts the bytes another one draws.
"""

from __future__ import annotations

import hashlib
import random

DEFAULT_SEED = 1729


def derive_seed(seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def spawn(seed: int, label: str) -> random.Random:
    return random.Random(derive_seed(seed, label))
