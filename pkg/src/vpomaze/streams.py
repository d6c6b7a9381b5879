"""Named deterministic RNG streams.

Every random draw in the package comes from a generator derived here.  A
stream is addressed by (root_seed, purpose, *indices); the purpose string
is hashed to a stable integer so two purposes never collide by accident,
and the indices let callers pre-assign independent streams to units of
work (one per maze, one per rollout, one per training step).  Because
streams are derived by key rather than by draw order, thread count and
work scheduling cannot change what any unit of work sees.
"""

import hashlib

import numpy as np

__all__ = ["purpose_id", "seed_sequence", "generator", "spawn_generators"]


def purpose_id(purpose: str) -> int:
    """Stable 64-bit integer for a purpose label."""
    digest = hashlib.blake2s(purpose.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def seed_sequence(root_seed: int, purpose: str, *indices: int) -> np.random.SeedSequence:
    key = [int(root_seed) & 0xFFFFFFFFFFFFFFFF, purpose_id(purpose)]
    key.extend(int(i) & 0xFFFFFFFFFFFFFFFF for i in indices)
    return np.random.SeedSequence(key)


def generator(root_seed: int, purpose: str, *indices: int) -> np.random.Generator:
    """PCG64 generator for the addressed stream."""
    return np.random.Generator(np.random.PCG64(seed_sequence(root_seed, purpose, *indices)))


def spawn_generators(root_seed: int, purpose: str, n: int, *indices: int) -> list[np.random.Generator]:
    """n generators for sub-units 0..n-1 of the addressed stream."""
    return [generator(root_seed, purpose, *indices, i) for i in range(n)]
