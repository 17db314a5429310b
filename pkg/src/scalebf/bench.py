"""Insert/lookup latency at increasing key counts.

For each scale a fresh structure is filled with that many keys. A stride of
the inserts is timed one by one; afterwards a shuffled mix of present and
absent keys is looked up and timed individually. Timings use the monotonic
``perf_counter_ns`` clock.
"""
from __future__ import annotations

import gc
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .filter3d import Dim3
from .scale import FilterConfig, ScaleBF


@dataclass
class BenchRow:
    keys: int
    insert_median_ns: float
    insert_p99_ns: float
    lookup_median_ns: float
    lookup_p99_ns: float
    insert_throughput: float
    lookup_throughput: float
    mean_chain_length: float
    max_chain_length: int
    total_groups: int
    load_factor: float
    insert_samples: int
    lookup_samples: int


@dataclass
class BenchReport:
    slots: int
    dims: str
    tau: int
    seed: int
    rows: list[BenchRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def latency_ratio(self, which: str = "lookup") -> float:
        """Median latency at the largest scale over the smallest."""
        attr = f"{which}_median_ns"
        return getattr(self.rows[-1], attr) / getattr(self.rows[0], attr)


def _key(seed: int, i: int) -> bytes:
    return b"bench:%d:%d" % (seed, i)


def bench_scale(config: FilterConfig, keys: int, samples: int = 100_000,
                rng: Optional[np.random.Generator] = None) -> BenchRow:
    rng = rng or np.random.default_rng(config.master_seed)
    sbf = ScaleBF(config)
    seed = config.master_seed
    clock = time.perf_counter_ns
    insert = sbf.insert

    stride = max(1, keys // samples)
    ins_lat = []
    t_start = clock()
    for i in range(keys):
        key = _key(seed, i)
        if i % stride:
            insert(key)
        else:
            t0 = clock()
            insert(key)
            ins_lat.append(clock() - t0)
    insert_elapsed = clock() - t_start

    present = rng.integers(0, keys, size=samples // 2)
    queries = [_key(seed, int(i)) for i in present]
    queries += [b"absent:%d:%d" % (seed, i) for i in range(samples - len(queries))]
    order = rng.permutation(len(queries))
    queries = [queries[i] for i in order]

    lookup = sbf.lookup
    look_lat = []
    t_start = clock()
    for key in queries:
        t0 = clock()
        lookup(key)
        look_lat.append(clock() - t0)
    lookup_elapsed = clock() - t_start

    stats = sbf.stats()
    ins = np.asarray(ins_lat, dtype=np.float64)
    look = np.asarray(look_lat, dtype=np.float64)
    row = BenchRow(
        keys=keys,
        insert_median_ns=float(np.median(ins)),
        insert_p99_ns=float(np.percentile(ins, 99)),
        lookup_median_ns=float(np.median(look)),
        lookup_p99_ns=float(np.percentile(look, 99)),
        insert_throughput=keys / (insert_elapsed / 1e9),
        lookup_throughput=len(queries) / (lookup_elapsed / 1e9),
        mean_chain_length=stats.mean_chain_length,
        max_chain_length=stats.max_chain_length,
        total_groups=stats.total_groups,
        load_factor=stats.load_factor,
        insert_samples=len(ins_lat),
        lookup_samples=len(look_lat),
    )
    del sbf, stats
    gc.collect()
    return row


def run_bench(scales: Sequence[int], dims: Dim3, slots: int, tau: int = 1,
              seed: int = 42, samples: int = 100_000,
              progress: Optional[Callable[[BenchRow], None]] = None) -> BenchReport:
    scales = list(scales)
    if not scales:
        raise ValueError("at least one scale is required")
    if scales != sorted(scales) or len(set(scales)) != len(scales):
        raise ValueError("scales must be strictly ascending")
    config = FilterConfig(slots, dims, tau, seed)
    report = BenchReport(slots, str(dims), tau, seed)
    rng = np.random.default_rng(seed)
    for n in scales:
        row = bench_scale(config, n, samples, rng)
        report.rows.append(row)
        if progress:
            progress(row)
    return report
