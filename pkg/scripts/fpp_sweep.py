"""Measured vs. predicted false-positive rate as one group fills up.

    python scripts/fpp_sweep.py --dims 13,17,19 --trials 1000000
"""
import argparse

from scalebf.analysis import empirical_fpp, fpp_classic, negative_keys
from scalebf.filter3d import Dim3
from scalebf.group import FilterGroup


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dims", default="13,17,19")
    ap.add_argument("--tau", type=int, default=1)
    ap.add_argument("--trials", type=int, default=1_000_000)
    ap.add_argument("--steps", type=int, default=8)
    args = ap.parse_args()

    dims = Dim3.parse(args.dims)
    group = FilterGroup(dims, args.tau, (1, 2, 3))
    capacity = group.capacity
    inserted = negative_keys(capacity, "sweep-ins")
    print(f"{'fill':>6} {'n':>8} {'filter pred':>12} {'filter meas':>12} "
          f"{'group pred':>12} {'group meas':>12}")
    for step in range(1, args.steps + 1):
        target = capacity * step // args.steps
        while group.inserted_count < target:
            group.insert(next(inserted))
        n = group.inserted_count
        single = fpp_classic(dims.bits, n)
        neg = f"sweep-neg-{step}"
        f_meas = empirical_fpp(group.filters[0], negative_keys(args.trials, neg), args.trials)
        g_meas = empirical_fpp(group, negative_keys(args.trials, neg), args.trials)
        print(f"{n / capacity:6.3f} {n:8d} {single:12.4e} {f_meas.rate:12.4e} "
              f"{single ** 3:12.4e} {g_meas.rate:12.4e}")


if __name__ == "__main__":
    main()
