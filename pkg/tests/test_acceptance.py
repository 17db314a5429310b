"""Exit criteria. Each test records a one-line verdict that is printed in the
pytest terminal summary under "acceptance criteria"."""
import gc
import math
import time

import numpy as np
import pytest

from oracles import chain_placement, exhaustive_fpp, ref_hash, residue_oracle
from scalebf import persist
from scalebf.analysis import (
    empirical_fpp,
    fpp_classic,
    fpp_grandi,
    negative_keys,
    poisson_interval,
)
from scalebf.bench import run_bench
from scalebf.errors import ImageError
from scalebf.filter3d import Bloom3D, Dim3
from scalebf.group import FilterGroup
from scalebf.scale import FilterConfig, ScaleBF

pytestmark = pytest.mark.slow

TAU1_FPP = 1 - math.exp(-1 / 63)


def test_1_zero_false_negatives(record_criterion):
    t0 = time.perf_counter()
    sbf = ScaleBF(FilterConfig(97, Dim3(101, 103, 107), 1, 42))
    rng = np.random.default_rng(42)
    raw = rng.integers(0, 2**64 - 1, size=(1_000_000, 2), dtype=np.uint64, endpoint=True)
    keys = [r.tobytes() for r in raw]
    sbf.update(keys)
    lookup = sbf.lookup
    present = sum(1 for k in keys if lookup(k))
    elapsed = time.perf_counter() - t0
    ok = present == len(keys) and elapsed < 30
    record_criterion("1. zero false negatives", ok,
                     f"{present}/{len(keys)} present, Q={sbf.total_groups}, {elapsed:.1f}s (<30s)")
    del sbf, keys
    gc.collect()
    assert present == 1_000_000
    assert elapsed < 30


def test_2_single_filter_fpp_at_fullness(record_criterion):
    dims = Dim3(13, 17, 19)
    n = dims.cells
    assert n == 4199 and dims.bits == 264537
    expected = fpp_classic(dims.bits, n)
    assert abs(expected - TAU1_FPP) < 1e-5
    details = []
    passes = 0
    for seed in range(1, 6):
        f = Bloom3D(dims, seed)
        for k in negative_keys(n, f"a2-ins-{seed}"):
            f.add(k)
        res = empirical_fpp(f, negative_keys(1_000_000, f"a2-neg-{seed}"), 1_000_000)
        rel = abs(res.rate / expected - 1)
        passes += rel <= 0.10
        details.append(f"{res.rate:.5f}")
    ok = passes >= 4
    record_criterion("2. single-filter FPP at fullness", ok,
                     f"{passes}/5 seeds within 10% of {expected:.5f}: {' '.join(details)}")
    assert ok


def test_3_group_fpp_product_law(record_criterion):
    t0 = time.perf_counter()
    dims = Dim3(13, 17, 19)
    g = FilterGroup(dims, 1, FilterConfig(97, dims, 1, 42).group_seeds(0, 0))
    for k in negative_keys(dims.cells, "a3-ins"):
        g.insert(k)
    assert g.is_full()
    trials = 10_000_000
    mean = trials * TAU1_FPP ** 3
    lo, hi = poisson_interval(mean, 0.997)
    res = empirical_fpp(g, negative_keys(trials, "a3-neg"), trials)
    elapsed = time.perf_counter() - t0
    ok = lo <= res.positives <= hi and elapsed < 120
    record_criterion("3. group FPP product law", ok,
                     f"{res.positives} false positives, 99.7% interval [{lo}, {hi}] "
                     f"around {mean:.1f}, {elapsed:.1f}s (<120s)")
    assert lo <= res.positives <= hi
    assert elapsed < 120


def test_4_grandi_exactness(record_criterion):
    t0 = time.perf_counter()
    worst_classic = max(abs(fpp_grandi(m, n) - fpp_classic(m, n))
                        for m in range(1, 51) for n in range(0, 21))
    worst_enum = max(abs(fpp_grandi(m, n) - float(exhaustive_fpp(m, n)))
                     for m in range(1, 7) for n in range(0, 7))
    elapsed = time.perf_counter() - t0
    ok = worst_classic < 1e-9 and worst_enum < 1e-12 and elapsed < 60
    record_criterion("4. exact FPP sum", ok,
                     f"max |exact-classic| {worst_classic:.2e} (<1e-9), "
                     f"max |exact-enumeration| {worst_enum:.2e} (<1e-12), {elapsed:.1f}s")
    assert worst_classic < 1e-9
    assert worst_enum < 1e-12
    assert elapsed < 60


def test_5_constant_time_scaling(record_criterion):
    t0 = time.perf_counter()
    dims = Dim3(31, 37, 41)
    slots = 257
    report = run_bench([100_000, 1_000_000, 10_000_000], dims, slots, tau=1, seed=42,
                       samples=100_000)
    elapsed = time.perf_counter() - t0
    ins = report.latency_ratio("insert")
    look = report.latency_ratio("lookup")
    chains = [r.mean_chain_length for r in report.rows]
    ok = ins < 2.0 and look < 2.0 and max(chains) <= 2 and elapsed < 600
    record_criterion("5. O(1) scaling", ok,
                     f"median ratio 1e7/1e5 insert {ins:.2f}, lookup {look:.2f} (<2.0); "
                     f"mean chain lengths {', '.join(f'{c:.2f}' for c in chains)}; {elapsed:.0f}s")
    gc.collect()
    assert max(chains) <= 2
    assert ins < 2.0
    assert look < 2.0
    assert elapsed < 600


def test_6_chain_discipline_and_oracle_equivalence(record_criterion):
    dims = Dim3(5, 11, 13)
    modulus = dims.bits
    assert modulus == 45045
    everything = np.arange(modulus, dtype=np.uint64)
    rng = np.random.default_rng(6)
    slot_choices = [2, 3, 5, 11, 13, 97]
    failures = []
    checked_filters = 0
    for w in range(100):
        slots = int(rng.choice(slot_choices))
        n = int(rng.integers(1, 10_001))
        pool = int(rng.integers(max(1, n // 2), 2 * n + 1))
        keys = [b"w%d:%d" % (w, int(i)) for i in rng.integers(0, pool, size=n)]
        seed = int(rng.integers(0, 2**32 - 1000))
        sbf = ScaleBF(FilterConfig(slots, dims, 1, seed))
        sbf.update(keys)

        for chain in sbf.chains:
            if not all(g.is_full() for g in chain[:-1]):
                failures.append(f"workload {w}: non-terminal group not full")

        placed, _ = chain_placement(keys, seed, slots, dims.cells)
        if len(placed) != sbf.total_groups:
            failures.append(f"workload {w}: group count {sbf.total_groups} != {len(placed)}")
            continue
        for (slot, ordinal), members in placed.items():
            group = sbf.chains[slot][ordinal]
            for f in group.filters:
                oracle = residue_oracle((ref_hash(k, f.seed) for k in members), dims)
                got = set(np.flatnonzero(f.contains_hashes(everything)).tolist())
                checked_filters += 1
                if got != oracle:
                    failures.append(f"workload {w}: slot {slot} group {ordinal} mismatch")
    ok = not failures
    record_criterion("6. chain discipline and oracle equivalence", ok,
                     f"100 workloads, {checked_filters} filters checked on all 45045 residues"
                     + (f"; {failures[:3]}" if failures else ""))
    assert not failures


def test_7_serialization_round_trip(record_criterion, tmp_path):
    sbf = ScaleBF(FilterConfig(13, Dim3(13, 17, 19), 1, 42))
    sbf.update(negative_keys(60_000, "a7-ins"))
    path = tmp_path / "a7.sbf"
    persist.save(sbf, path)
    back = persist.load(path)

    cells_equal = all(
        bytes(fa.cells) == bytes(fb.cells)
        for (_, _, ga), (_, _, gb) in zip(sbf.groups(), back.groups())
        for fa, fb in zip(ga.filters, gb.filters)
    ) and back.total_groups == sbf.total_groups
    probes = list(negative_keys(5_000, "a7-ins")) + list(negative_keys(5_000, "a7-probe"))
    verdicts_equal = [back.lookup(k) for k in probes] == [sbf.lookup(k) for k in probes]

    data = bytearray(path.read_bytes())
    data[-3] ^= 0x01
    bad = tmp_path / "bad.sbf"
    bad.write_bytes(bytes(data))
    try:
        persist.load(bad)
        rejected = False
    except ImageError:
        rejected = True
    ok = cells_equal and verdicts_equal and rejected
    record_criterion("7. serialization round-trip", ok,
                     f"cells identical={cells_equal}, 10^4 verdicts identical={verdicts_equal}, "
                     f"corrupt checksum rejected={rejected}")
    assert cells_equal and verdicts_equal and rejected


def _snapshot(sbf):
    return {slot: [tuple(bytes(f.cells) for f in g.filters) for g in chain]
            for slot, chain in enumerate(sbf.chains)}


def test_8_idempotency_and_isolation(record_criterion):
    dims = Dim3(13, 17, 19)
    keys = list(negative_keys(20_000, "a8"))

    f1, f2 = Bloom3D(dims, 1), Bloom3D(dims, 1)
    for k in keys[:3000]:
        f1.add(k)
        f2.add(k)
        f2.add(k)
    idempotent = bytes(f1.cells) == bytes(f2.cells)

    big = ScaleBF(FilterConfig(11, Dim3(101, 103, 107), 1, 8))
    small_set = keys[:5000]
    single = ScaleBF(FilterConfig(11, Dim3(101, 103, 107), 1, 8))
    big.update(small_set)
    big.update(small_set)
    single.update(small_set)
    idempotent = idempotent and _snapshot(big) == _snapshot(single)
    del big, single

    sbf = ScaleBF(FilterConfig(11, dims, 1, 8))
    by_slot = {}
    for k in keys:
        by_slot.setdefault(sbf.route(k), []).append(k)
    isolated = True
    for slot in sorted(by_slot):
        before = _snapshot(sbf)
        sbf.update(by_slot[slot])
        after = _snapshot(sbf)
        isolated &= all(before[s] == after[s] for s in range(11) if s != slot)
        isolated &= all(not sbf.chains[s] for s in by_slot if s > slot)
    isolated &= all(sbf.lookup(k) for k in keys)

    ok = idempotent and isolated
    record_criterion("8. idempotency and isolation", ok,
                     f"double insertion bit-identical={idempotent}, "
                     f"cross-slot isolation={isolated}")
    assert idempotent and isolated
