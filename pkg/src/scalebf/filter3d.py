"""The 3D Bloom filter: one bit per key in a cube of 64-bit cells.

A hash value ``h`` addresses cell ``(h % X, h % Y, h % Z)`` and bit
``h % 63`` inside it. Bit 63 of every cell stays clear. With X, Y, Z prime
and coprime to 63 the four residues are a bijection of ``h mod X*Y*Z*63``.
"""
from __future__ import annotations

from array import array
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError
from .hashing import Key, hash64, hash64_many
from .primes import is_prime

CELL_BITS = 63
MAX_TAU = CELL_BITS
MAX_CELLS = 1 << 31


@dataclass(frozen=True)
class Dim3:
    X: int
    Y: int
    Z: int

    def __post_init__(self) -> None:
        dims = (self.X, self.Y, self.Z)
        for d in dims:
            if not isinstance(d, int) or not is_prime(d):
                raise ConfigError(f"dimension {d} is not prime")
            if 63 % d == 0:
                raise ConfigError(f"dimension {d} shares a factor with 63")
        if len(set(dims)) != 3:
            raise ConfigError(f"dimensions must be pairwise distinct, got {dims}")
        if self.cells > MAX_CELLS:
            raise ConfigError(f"X*Y*Z = {self.cells} exceeds the 2**31 cell limit")

    @classmethod
    def parse(cls, text: str) -> "Dim3":
        """Parse ``"X,Y,Z"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ConfigError(f"expected three comma-separated dimensions, got {text!r}")
        try:
            return cls(*(int(p) for p in parts))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"dimensions must be integers, got {text!r}") from None

    @property
    def cells(self) -> int:
        return self.X * self.Y * self.Z

    @property
    def bits(self) -> int:
        """Usable bit capacity ``m = X*Y*Z*63``."""
        return self.cells * CELL_BITS

    def __str__(self) -> str:
        return f"{self.X},{self.Y},{self.Z}"


class CellCoord(NamedTuple):
    i: int
    j: int
    k: int
    rho: int


def coords(h: int, dims: Dim3) -> CellCoord:
    return CellCoord(h % dims.X, h % dims.Y, h % dims.Z, h % CELL_BITS)


def check_tau(tau: int) -> int:
    if not isinstance(tau, int) or not 1 <= tau <= MAX_TAU:
        raise ConfigError(f"tau must be an integer in [1, {MAX_TAU}], got {tau!r}")
    return tau


class Bloom3D:
    """A single 3D Bloom filter.

    Cells live in one row-major ``array('Q')`` of ``X*Y*Z`` words; flat
    index of ``(i, j, k)`` is ``(i*Y + j)*Z + k``.

    Not synchronized: concurrent lookups are fine only while nobody inserts.
    """

    __slots__ = ("dims", "seed", "cells", "inserted_count", "set_bit_count")

    def __init__(self, dims: Dim3, seed: int) -> None:
        self.dims = dims
        self.seed = seed
        self.cells = array("Q", bytes(8 * dims.cells))
        self.inserted_count = 0
        self.set_bit_count = 0

    def _index(self, h: int) -> int:
        d = self.dims
        return ((h % d.X) * d.Y + h % d.Y) * d.Z + h % d.Z

    def insert_hash(self, h: int) -> None:
        idx = self._index(h)
        mask = 1 << (h % CELL_BITS)
        cell = self.cells[idx]
        if not cell & mask:
            self.cells[idx] = cell | mask
            self.set_bit_count += 1
        self.inserted_count += 1

    def contains_hash(self, h: int) -> bool:
        return bool((self.cells[self._index(h)] >> (h % CELL_BITS)) & 1)

    def add(self, key: Key) -> None:
        self.insert_hash(hash64(key, self.seed))

    def __contains__(self, key: Key) -> bool:
        return self.contains_hash(hash64(key, self.seed))

    def contains_hashes(self, hs: np.ndarray) -> np.ndarray:
        """Vectorised ``contains_hash`` over a ``uint64`` array."""
        d = self.dims
        hs = np.asarray(hs, dtype=np.uint64)
        idx = ((hs % np.uint64(d.X)) * np.uint64(d.Y) + hs % np.uint64(d.Y)) * np.uint64(d.Z)
        idx += hs % np.uint64(d.Z)
        rho = hs % np.uint64(CELL_BITS)
        words = self.words()[idx.astype(np.intp)]
        return ((words >> rho) & np.uint64(1)).astype(bool)

    def contains_many(self, keys) -> np.ndarray:
        return self.contains_hashes(hash64_many(keys, self.seed))

    lookup_many = contains_many

    def words(self) -> np.ndarray:
        """Zero-copy ``uint64`` view of the cell array."""
        return np.frombuffer(self.cells, dtype=np.uint64)

    def popcount(self) -> int:
        """Set bits by full scan (independent of the running counter)."""
        return int(np.bitwise_count(self.words()).sum(dtype=np.int64))

    @property
    def capacity_bits(self) -> int:
        return self.dims.bits

    def set_bit_fraction(self) -> float:
        return self.set_bit_count / self.dims.bits

    def is_full(self, tau: int) -> bool:
        check_tau(tau)
        return self.inserted_count >= tau * self.dims.cells

    def __repr__(self) -> str:
        return (f"Bloom3D(dims=({self.dims}), seed={self.seed}, "
                f"inserted={self.inserted_count}, set_bits={self.set_bit_count})")
