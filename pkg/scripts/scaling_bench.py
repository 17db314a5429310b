"""Latency at growing key counts; writes the report as JSON.

    python scripts/scaling_bench.py --scales 1e5,1e6,1e7 --out bench.json
"""
import argparse
import json

from scalebf.bench import run_bench
from scalebf.filter3d import Dim3


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scales", default="1e5,1e6,1e7")
    ap.add_argument("--dims", default="31,37,41")
    ap.add_argument("--slots", type=int, default=257)
    ap.add_argument("--tau", type=int, default=1)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--out")
    args = ap.parse_args()

    scales = [int(float(s)) for s in args.scales.split(",")]
    report = run_bench(scales, Dim3.parse(args.dims), args.slots, args.tau, args.seed,
                       args.samples, progress=lambda r: print(
                           f"{r.keys:>10d} keys: insert p50 {r.insert_median_ns:.0f} ns, "
                           f"lookup p50 {r.lookup_median_ns:.0f} ns, chain {r.mean_chain_length:.2f}",
                           flush=True))
    print(f"median ratio largest/smallest: insert {report.latency_ratio('insert'):.2f}, "
          f"lookup {report.latency_ratio('lookup'):.2f}")
    if args.out:
        with open(args.out, "w") as f:
            json.dump(report.to_dict(), f, indent=2)


if __name__ == "__main__":
    main()
