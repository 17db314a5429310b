"""Three 3D filters answering as one Bloom filter.

Every key goes into all three members under distinct seeds; a lookup is
positive only when all three agree, so per-member false-positive rates
multiply.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import CapacityError, ConfigError
from .filter3d import Bloom3D, Dim3, check_tau
from .hashing import Key, hash64, hash64_many

GROUP_SIZE = 3


class FilterGroup:
    __slots__ = ("dims", "tau", "filters", "inserted_count")

    def __init__(self, dims: Dim3, tau: int, seeds: Sequence[int]) -> None:
        check_tau(tau)
        seeds = tuple(seeds)
        if len(seeds) != GROUP_SIZE:
            raise ConfigError(f"a group needs exactly {GROUP_SIZE} seeds, got {len(seeds)}")
        if len(set(seeds)) != GROUP_SIZE:
            raise ConfigError(f"group seeds must be pairwise distinct, got {seeds}")
        self.dims = dims
        self.tau = tau
        self.filters = tuple(Bloom3D(dims, s) for s in seeds)
        self.inserted_count = 0

    @property
    def seeds(self) -> tuple[int, int, int]:
        return tuple(f.seed for f in self.filters)

    @property
    def capacity(self) -> int:
        return self.tau * self.dims.cells

    def is_full(self) -> bool:
        return self.inserted_count >= self.capacity

    def insert(self, key: Key) -> None:
        if self.inserted_count >= self.capacity:
            raise CapacityError(f"group is full ({self.inserted_count}/{self.capacity})")
        for f in self.filters:
            f.insert_hash(hash64(key, f.seed))
        self.inserted_count += 1

    def lookup(self, key: Key) -> bool:
        for f in self.filters:
            if not f.contains_hash(hash64(key, f.seed)):
                return False
        return True

    __contains__ = lookup

    def lookup_many(self, keys: Sequence[Key]) -> np.ndarray:
        """Vectorised lookup; returns a boolean array aligned with ``keys``."""
        hit = np.ones(len(keys), dtype=bool)
        for f in self.filters:
            hit &= f.contains_hashes(hash64_many(keys, f.seed))
        return hit

    def fill_ratio(self) -> float:
        return self.inserted_count / self.capacity

    def __repr__(self) -> str:
        return (f"FilterGroup(dims=({self.dims}), tau={self.tau}, seeds={self.seeds}, "
                f"inserted={self.inserted_count}/{self.capacity})")
