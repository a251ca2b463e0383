"""Deterministic randomness derivation.

Every random decision in a run is drawn from a substream keyed by the
scenario master seed plus a structural path (party, purpose, run index...),
so removing one party or changing the worker count never shifts anyone
else's draws.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _path_entropy(path) -> list[int]:
    out = []
    for item in path:
        if isinstance(item, (int, np.integer)):
            out.append(int(item) & 0xFFFFFFFF)
            out.append((int(item) >> 32) & 0xFFFFFFFF)
        else:
            digest = hashlib.sha256(str(item).encode("utf-8")).digest()
            out.append(int.from_bytes(digest[:4], "big"))
            out.append(int.from_bytes(digest[4:8], "big"))
    return out


def seed_sequence(master_seed: int, *path) -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed & 0xFFFFFFFFFFFFFFFF] + _path_entropy(path))


def generator(master_seed: int, *path) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(master_seed, *path)))


def derive_seed(master_seed: int, *path) -> int:
    """A 63-bit sub-seed, e.g. the per-run seed of batch run #i."""
    state = seed_sequence(master_seed, *path).generate_state(1, np.uint64)[0]
    return int(state) & 0x7FFFFFFFFFFFFFFF
