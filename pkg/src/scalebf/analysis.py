"""False-positive analysis: closed forms, the exact occupancy sum, and
empirical measurement against live filters.

All single-filter formulas assume one hash position per key (k = 1), which
is how a 3D filter behaves.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import islice
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
from scipy import stats

from .filter3d import Bloom3D
from .group import GROUP_SIZE, FilterGroup

GRANDI_MAX_M = 512


def fpp_classic(m: int, n: int) -> float:
    """``1 - (1 - 1/m)**n``, evaluated via log1p/expm1."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n == 0:
        return 0.0
    if m == 1:
        return 1.0
    return -math.expm1(n * math.log1p(-1.0 / m))


def fpp_grandi(m: int, n: int, exact: bool = False) -> float | Fraction:
    """Exact FPP as the sum over the number ``x`` of set bits::

        sum_x (x/m) * C(m,x) * sum_j (-1)**j * C(x,j) * ((x-j)/m)**n

    Evaluated in integer arithmetic (the float form cancels catastrophically),
    with one common denominator ``m**(n+1)``.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if m > GRANDI_MAX_M:
        raise ValueError(
            f"exact evaluation is limited to m <= {GRANDI_MAX_M} (got m={m}); "
            "use fpp_classic, which is exact for a single hash position")
    powers = [t ** n for t in range(m + 1)]
    total = 0
    for x in range(1, m + 1):
        inner = 0
        cx = 1  # C(x, j)
        for j in range(x + 1):
            term = cx * powers[x - j]
            inner += -term if j & 1 else term
            cx = cx * (x - j) // (j + 1)
        total += x * math.comb(m, x) * inner
    denom = m ** (n + 1)
    if exact:
        return Fraction(total, denom)
    return total / denom


def fpp_group(per_filter: Sequence[float]) -> float:
    """FPP of a group whose members must all answer positive."""
    if len(per_filter) != GROUP_SIZE:
        raise ValueError(f"expected {GROUP_SIZE} per-filter values, got {len(per_filter)}")
    out = 1.0
    for p in per_filter:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability out of range: {p}")
        out *= p
    return out


def fpp_average(values: Sequence[float]) -> float:
    """Unweighted mean of per-group FPPs."""
    values = list(values)
    if not values:
        raise ValueError("fpp_average needs at least one value")
    return math.fsum(values) / len(values)


def fpp_chain(group_fpps: Iterable[float]) -> float:
    """Probability that a scan over a chain hits at least one false positive."""
    miss = 1.0
    for p in group_fpps:
        miss *= 1.0 - p
    return 1.0 - miss


def filter_fpp(f: Bloom3D) -> float:
    return fpp_classic(f.capacity_bits, f.inserted_count)


def group_fpp(g: FilterGroup) -> float:
    return fpp_group([filter_fpp(f) for f in g.filters])


@dataclass(frozen=True)
class CapacityReport:
    slots: int
    total_groups: int
    load_factor: float
    # tau*X*Y*Z*Q/P, substituted as written (Q counted in groups).
    available_bits_literal: float
    # sum over groups of (capacity - inserted), in items and in bits
    # (each item occupies one bit in each of the three members).
    remaining_items: int
    remaining_bits: int


def capacity_report(config, group_fills: Sequence[int]) -> CapacityReport:
    """Load factor and available-capacity figures for a chained structure.

    ``group_fills`` holds the inserted count of every live group.
    """
    q = len(group_fills)
    cap = config.tau * config.dims.cells
    remaining = sum(cap - n for n in group_fills)
    return CapacityReport(
        slots=config.slots,
        total_groups=q,
        load_factor=q / config.slots,
        available_bits_literal=config.tau * config.dims.cells * q / config.slots,
        remaining_items=remaining,
        remaining_bits=GROUP_SIZE * remaining,
    )


def poisson_interval(mean: float, coverage: float = 0.997) -> tuple[int, int]:
    """Central ``coverage`` interval of Poisson(mean) counts, inclusive."""
    if mean == 0:
        return 0, 0
    tail = (1.0 - coverage) / 2.0
    return int(stats.poisson.ppf(tail, mean)), int(stats.poisson.ppf(1.0 - tail, mean))


def poisson_rate_bounds(count: int, trials: int, confidence: float = 0.99) -> tuple[float, float]:
    """Exact (Garwood) confidence bounds on a rate from an observed count."""
    alpha = 1.0 - confidence
    lo = 0.0 if count == 0 else stats.chi2.ppf(alpha / 2, 2 * count) / 2
    hi = stats.chi2.ppf(1 - alpha / 2, 2 * count + 2) / 2
    return lo / trials, hi / trials


def negative_keys(count: int, namespace: str = "neg") -> Iterator[bytes]:
    """Keys that can never collide with keys from another namespace."""
    prefix = f"{namespace}:".encode()
    for i in range(count):
        yield prefix + str(i).encode()


@dataclass(frozen=True)
class EmpiricalFpp:
    positives: int
    trials: int
    rate: float
    lower: float
    upper: float
    confidence: float = 0.99


def empirical_fpp(target, negatives: Iterable[bytes], trials: int,
                  batch: int = 1 << 18, confidence: float = 0.99) -> EmpiricalFpp:
    """Query ``trials`` keys known to be absent and count positive answers.

    ``target`` is anything with ``lookup_many`` (a Bloom3D, FilterGroup or
    ScaleBF). The caller guarantees ``negatives`` is disjoint from every
    inserted key.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    it = iter(negatives)
    positives = 0
    seen = 0
    while seen < trials:
        chunk = list(islice(it, min(batch, trials - seen)))
        if not chunk:
            raise ValueError(f"negative key stream ran out after {seen} keys")
        positives += int(np.count_nonzero(target.lookup_many(chunk)))
        seen += len(chunk)
    lo, hi = poisson_rate_bounds(positives, trials, confidence)
    return EmpiricalFpp(positives, trials, positives / trials, lo, hi, confidence)


@dataclass
class FppReport:
    m: int
    n: int
    fpp_classic: float
    fpp_grandi: Optional[float]
    fpp_group: float
    fpp_average: Optional[float] = None
    fpp_query: Optional[float] = None
    groups: int = 0
    empirical: Optional[EmpiricalFpp] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.empirical is None:
            d.pop("empirical")
        return d


def fpp_report(target) -> FppReport:
    """Analytic FPP figures for a Bloom3D, FilterGroup or ScaleBF.

    For a chained structure ``fpp_classic``/``fpp_grandi`` describe a single
    member filter holding the mean per-group load, ``fpp_average`` is the
    unweighted mean over groups and ``fpp_query`` is the expected rate for a
    uniformly routed absent key (chain scans composed per slot).
    """
    if isinstance(target, Bloom3D):
        m, n = target.capacity_bits, target.inserted_count
        p = fpp_classic(m, n)
        return FppReport(m, n, p, _maybe_grandi(m, n), p, fpp_query=p)
    if isinstance(target, FilterGroup):
        m, n = target.dims.bits, target.inserted_count
        g = group_fpp(target)
        return FppReport(m, n, fpp_classic(m, n), _maybe_grandi(m, n), g,
                         fpp_average=g, fpp_query=g, groups=1)

    cfg = target.config
    m = cfg.dims.bits
    per_group = [group_fpp(g) for _, _, g in target.groups()]
    q = len(per_group)
    mean_n = round(target.total_keys / q) if q else 0
    per_slot = [fpp_chain(group_fpp(g) for g in chain) for chain in target.chains]
    return FppReport(
        m=m,
        n=target.total_keys,
        fpp_classic=fpp_classic(m, mean_n),
        fpp_grandi=_maybe_grandi(m, mean_n),
        fpp_group=fpp_group([fpp_classic(m, mean_n)] * GROUP_SIZE),
        fpp_average=fpp_average(per_group) if per_group else 0.0,
        fpp_query=math.fsum(per_slot) / cfg.slots,
        groups=q,
    )


def _maybe_grandi(m: int, n: int) -> Optional[float]:
    return fpp_grandi(m, n) if m <= GRANDI_MAX_M else None
