"""Deterministic seed derivation.

Every random draw in the package goes through :func:`derive_seed`, which mixes a
64-bit master seed with a tuple of integer indices using BLAKE2b. The mixing is
byte-level, so it is identical on every platform and numpy version; the derived
value seeds a numpy ``PCG64`` bit generator.
"""

from __future__ import annotations

import hashlib
import struct
from collections.abc import Iterable

import numpy as np

RNG_IDENTIFIER = "numpy.random.PCG64 seeded by blake2b-64(master, indices)"

_MASK64 = (1 << 64) - 1


def derive_seed(master: int, indices: Iterable[int]) -> int:
    """Mix ``master`` and ``indices`` into a new unsigned 64-bit seed."""
    if not 0 <= master <= _MASK64:
        raise ValueError(f"master seed must be an unsigned 64-bit integer, got {master}")
    idx = [int(i) for i in indices]
    h = hashlib.blake2b(digest_size=8, person=b"deepnqs-seed")
    h.update(struct.pack("<QI", master, len(idx)))
    for i in idx:
        h.update(struct.pack("<q", i))
    return int.from_bytes(h.digest(), "little")


def make_rng(master: int, indices: Iterable[int] = ()) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(master, indices)))
