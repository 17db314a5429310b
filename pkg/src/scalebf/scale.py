"""The chained scalable filter.

``P`` prime slots each hold an ordered chain of :class:`FilterGroup`.
A key is routed to one slot by hash, inserted into the newest group of that
chain (a fresh group is linked on when the newest is full) and looked up by
scanning the chain front to back.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError
from .filter3d import Dim3, check_tau
from .group import GROUP_SIZE, FilterGroup
from .hashing import MASK64, Key, hash64, hash64_many
from .primes import is_prime


@dataclass(frozen=True)
class FilterConfig:
    slots: int
    dims: Dim3
    tau: int = 1
    master_seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.slots, int) or not is_prime(self.slots):
            raise ConfigError(f"slot count must be prime, got {self.slots}")
        if not isinstance(self.dims, Dim3):
            raise ConfigError("dims must be a Dim3")
        check_tau(self.tau)
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed <= MASK64:
            raise ConfigError(f"master seed must be a 64-bit unsigned integer, got {self.master_seed}")

    @property
    def routing_seed(self) -> int:
        return self.master_seed

    @property
    def group_capacity(self) -> int:
        return self.tau * self.dims.cells

    def group_seeds(self, slot: int, ordinal: int) -> tuple[int, int, int]:
        """Seeds of the ``ordinal``-th group in chain ``slot``.

        ``ordinal*P + slot`` is injective over (slot, ordinal) for a fixed P,
        so every group in a structure gets its own seed triple, and none of
        them equals the routing seed. Group 0 of slot 0 uses master+1..+3.
        """
        base = self.master_seed + 1 + GROUP_SIZE * (ordinal * self.slots + slot)
        return tuple((base + p) & MASK64 for p in range(GROUP_SIZE))


@dataclass
class ScaleStats:
    slots: int
    total_groups: int
    total_keys: int
    load_factor: float
    group_capacity: int
    available_bits_literal: float
    remaining_capacity_items: int
    remaining_capacity_bits: int
    chain_lengths: list[int] = field(repr=False)
    fill_ratios: list[float] = field(repr=False)

    @property
    def max_chain_length(self) -> int:
        return max(self.chain_lengths, default=0)

    @property
    def mean_chain_length(self) -> float:
        return self.total_groups / self.slots

    def chain_length_histogram(self) -> dict[int, int]:
        counts = np.bincount(np.asarray(self.chain_lengths, dtype=np.int64))
        return {length: int(c) for length, c in enumerate(counts) if c}

    def to_dict(self) -> dict:
        return {
            "slots": self.slots,
            "total_groups": self.total_groups,
            "total_keys": self.total_keys,
            "load_factor": self.load_factor,
            "group_capacity": self.group_capacity,
            "available_bits_literal": self.available_bits_literal,
            "remaining_capacity_items": self.remaining_capacity_items,
            "remaining_capacity_bits": self.remaining_capacity_bits,
            "max_chain_length": self.max_chain_length,
            "mean_chain_length": self.mean_chain_length,
            "chain_length_histogram": self.chain_length_histogram(),
            "fill_ratios": self.fill_ratios,
        }


class ScaleBF:
    """Scalable membership filter over chained groups of 3D Bloom filters.

    Single writer, many readers: lookups may run concurrently only while no
    insert is in progress. There is no internal locking.
    """

    def __init__(self, config: FilterConfig) -> None:
        self.config = config
        self.chains: list[list[FilterGroup]] = [[] for _ in range(config.slots)]
        self.total_groups = 0
        self.total_keys = 0

    @classmethod
    def create(cls, slots: int, dims: Dim3 | Sequence[int], tau: int = 1,
               master_seed: int = 0) -> "ScaleBF":
        if not isinstance(dims, Dim3):
            dims = Dim3(*dims)
        return cls(FilterConfig(slots, dims, tau, master_seed))

    def route(self, key: Key) -> int:
        return hash64(key, self.config.routing_seed) % self.config.slots

    def _new_group(self, slot: int) -> FilterGroup:
        chain = self.chains[slot]
        cfg = self.config
        group = FilterGroup(cfg.dims, cfg.tau, cfg.group_seeds(slot, len(chain)))
        chain.append(group)
        self.total_groups += 1
        return group

    def insert(self, key: Key) -> bool:
        """Insert ``key``; returns True if a new group had to be linked on."""
        slot = hash64(key, self.config.routing_seed) % self.config.slots
        chain = self.chains[slot]
        grew = False
        if not chain or chain[-1].inserted_count >= chain[-1].capacity:
            self._new_group(slot)
            grew = True
        chain[-1].insert(key)
        self.total_keys += 1
        return grew

    add = insert

    def update(self, keys: Iterable[Key]) -> int:
        """Insert every key; returns the number of groups created."""
        before = self.total_groups
        for key in keys:
            self.insert(key)
        return self.total_groups - before

    def lookup(self, key: Key) -> bool:
        for group in self.chains[hash64(key, self.config.routing_seed) % self.config.slots]:
            if group.lookup(key):
                return True
        return False

    __contains__ = lookup

    def lookup_many(self, keys: Sequence[Key]) -> np.ndarray:
        """Vectorised lookup; same answers as calling :meth:`lookup` per key."""
        keys = list(keys)
        slots = hash64_many(keys, self.config.routing_seed) % np.uint64(self.config.slots)
        hit = np.zeros(len(keys), dtype=bool)
        order = np.argsort(slots, kind="stable")
        sorted_slots = slots[order]
        bounds = np.flatnonzero(np.diff(sorted_slots)) + 1
        for idx in np.split(order, bounds):
            if idx.size == 0:
                continue
            chain = self.chains[int(slots[idx[0]])]
            if not chain:
                continue
            subset = [keys[i] for i in idx]
            found = np.zeros(idx.size, dtype=bool)
            for group in chain:
                found |= group.lookup_many(subset)
            hit[idx] = found
        return hit

    def groups(self) -> Iterable[tuple[int, int, FilterGroup]]:
        """Yield ``(slot, ordinal, group)`` for every group."""
        for slot, chain in enumerate(self.chains):
            for ordinal, group in enumerate(chain):
                yield slot, ordinal, group

    @property
    def load_factor(self) -> float:
        return self.total_groups / self.config.slots

    def stats(self) -> ScaleStats:
        from .analysis import capacity_report

        fills = [g.inserted_count for _, _, g in self.groups()]
        cap = capacity_report(self.config, fills)
        return ScaleStats(
            slots=self.config.slots,
            total_groups=self.total_groups,
            total_keys=self.total_keys,
            load_factor=cap.load_factor,
            group_capacity=self.config.group_capacity,
            available_bits_literal=cap.available_bits_literal,
            remaining_capacity_items=cap.remaining_items,
            remaining_capacity_bits=cap.remaining_bits,
            chain_lengths=[len(c) for c in self.chains],
            fill_ratios=[n / self.config.group_capacity for n in fills],
        )

    def __len__(self) -> int:
        return self.total_keys

    def __repr__(self) -> str:
        c = self.config
        return (f"ScaleBF(P={c.slots}, dims=({c.dims}), tau={c.tau}, seed={c.master_seed}, "
                f"Q={self.total_groups}, keys={self.total_keys})")
