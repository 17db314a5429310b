"""Seeded 64-bit hashing of byte-string keys.

Every hash in the package is the low 64 bits of MurmurHash3 x64/128.
The ``mmh3`` C extension handles 32-bit seeds; wider seeds go through a
pure-Python port that extends the reference seeding (``h1 = h2 = seed``)
to 64 bits, so both paths agree wherever they overlap.
"""
from __future__ import annotations

from typing import Iterable, Union

import mmh3
import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
SEED32_LIMIT = 1 << 32

Key = Union[bytes, bytearray, memoryview, str]

_C1 = 0x87C37B91114253D5
_C2 = 0x4CF5AD432745937F


def as_bytes(key: Key) -> bytes:
    """Normalise a key to bytes; ``str`` keys are encoded as UTF-8."""
    if isinstance(key, str):
        return key.encode("utf-8")
    return bytes(key)


def _rotl64(x: int, r: int) -> int:
    return ((x << r) | (x >> (64 - r))) & MASK64


def _fmix64(k: int) -> int:
    k ^= k >> 33
    k = (k * 0xFF51AFD7ED558CCD) & MASK64
    k ^= k >> 33
    k = (k * 0xC4CEB9FE1A85EC53) & MASK64
    k ^= k >> 33
    return k


def murmur3_x64_128(data: bytes, seed: int = 0) -> tuple[int, int]:
    """Pure-Python MurmurHash3 x64/128 returning ``(h1, h2)``.

    Accepts any seed in ``[0, 2**64)``.
    """
    length = len(data)
    h1 = h2 = seed & MASK64
    nblocks = length // 16

    for b in range(nblocks):
        off = b * 16
        k1 = int.from_bytes(data[off:off + 8], "little")
        k2 = int.from_bytes(data[off + 8:off + 16], "little")

        k1 = (k1 * _C1) & MASK64
        k1 = _rotl64(k1, 31)
        k1 = (k1 * _C2) & MASK64
        h1 ^= k1
        h1 = _rotl64(h1, 27)
        h1 = (h1 + h2) & MASK64
        h1 = (h1 * 5 + 0x52DCE729) & MASK64

        k2 = (k2 * _C2) & MASK64
        k2 = _rotl64(k2, 33)
        k2 = (k2 * _C1) & MASK64
        h2 ^= k2
        h2 = _rotl64(h2, 31)
        h2 = (h2 + h1) & MASK64
        h2 = (h2 * 5 + 0x38495AB5) & MASK64

    tail = data[nblocks * 16:]
    rem = len(tail)
    if rem > 8:
        k2 = int.from_bytes(tail[8:], "little")
        k2 = (k2 * _C2) & MASK64
        k2 = _rotl64(k2, 33)
        k2 = (k2 * _C1) & MASK64
        h2 ^= k2
    if rem > 0:
        k1 = int.from_bytes(tail[:8], "little")
        k1 = (k1 * _C1) & MASK64
        k1 = _rotl64(k1, 31)
        k1 = (k1 * _C2) & MASK64
        h1 ^= k1

    h1 ^= length
    h2 ^= length
    h1 = (h1 + h2) & MASK64
    h2 = (h2 + h1) & MASK64
    h1 = _fmix64(h1)
    h2 = _fmix64(h2)
    h1 = (h1 + h2) & MASK64
    h2 = (h2 + h1) & MASK64
    return h1, h2


def hash64(key: Key, seed: int) -> int:
    """Low 64 bits of the MurmurHash3 x64/128 digest of ``key``."""
    if 0 <= seed < SEED32_LIMIT:
        return mmh3.hash64(key, seed, signed=False)[0]
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must fit in 64 bits, got {seed}")
    return murmur3_x64_128(as_bytes(key), seed)[0]


def hash64_many(keys: Iterable[Key], seed: int) -> np.ndarray:
    """Vector of ``hash64(k, seed)`` for every key, as ``uint64``."""
    if 0 <= seed < SEED32_LIMIT:
        h = mmh3.hash64
        values = [h(k, seed, signed=False)[0] for k in keys]
    else:
        values = [hash64(k, seed) for k in keys]
    return np.array(values, dtype=np.uint64)
