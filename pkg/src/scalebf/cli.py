"""Command-line interface: build, insert, query, stats, fpp, bench."""
from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from typing import BinaryIO, Iterator, Optional, Sequence

from . import persist
from .analysis import empirical_fpp, fpp_report, negative_keys
from .bench import BenchRow, run_bench
from .errors import ConfigError, ImageError
from .filter3d import Dim3
from .scale import FilterConfig, ScaleBF

PROG = "scalebf"


class CliError(Exception):
    pass


@contextmanager
def _key_source(path: Optional[str]) -> Iterator[BinaryIO]:
    if path is None or path == "-":
        yield sys.stdin.buffer
    else:
        try:
            f = open(path, "rb")
        except OSError as exc:
            raise CliError(f"cannot read keys from {path}: {exc.strerror}") from None
        with f:
            yield f


def read_keys(f: BinaryIO) -> Iterator[bytes]:
    """Newline-delimited UTF-8 keys; the line bytes minus the newline."""
    for lineno, line in enumerate(f, 1):
        if line.endswith(b"\n"):
            line = line[:-1]
        try:
            line.decode("utf-8")
        except UnicodeDecodeError:
            raise CliError(f"key on line {lineno} is not valid UTF-8") from None
        yield line


def _load(path: str) -> ScaleBF:
    try:
        return persist.load(path)
    except FileNotFoundError:
        raise CliError(f"no such filter image: {path}") from None


def _emit(args, data: dict, text_lines: Sequence[str], stream=None) -> None:
    stream = stream or sys.stdout
    if args.json:
        print(json.dumps(data, sort_keys=True), file=stream)
    else:
        for line in text_lines:
            print(line, file=stream)


def cmd_build(args) -> int:
    config = FilterConfig(args.slots, Dim3.parse(args.dims), args.tau, args.seed)
    sbf = ScaleBF(config)
    persist.save(sbf, args.out)
    _emit(args, {"path": args.out, "slots": config.slots, "dims": str(config.dims),
                 "tau": config.tau, "seed": config.master_seed, "total_groups": 0},
          [f"built {args.out}: P={config.slots} dims={config.dims} tau={config.tau} "
           f"seed={config.master_seed} Q=0"])
    return 0


def cmd_insert(args) -> int:
    sbf = _load(args.filter)
    with _key_source(args.keys) as f:
        count = 0
        before = sbf.total_groups
        for key in read_keys(f):
            sbf.insert(key)
            count += 1
    persist.save(sbf, args.filter)
    created = sbf.total_groups - before
    _emit(args, {"keys_inserted": count, "groups_created": created,
                 "total_groups": sbf.total_groups, "total_keys": sbf.total_keys},
          [f"inserted {count} keys, created {created} groups "
           f"(Q={sbf.total_groups}, total keys={sbf.total_keys})"])
    return 0


def cmd_query(args) -> int:
    sbf = _load(args.filter)
    out = sys.stdout.buffer
    present = absent = 0
    with _key_source(args.keys) as f:
        for key in read_keys(f):
            if sbf.lookup(key):
                present += 1
                verdict = b"present"
            else:
                absent += 1
                verdict = b"absent"
            if not args.summary_only:
                out.write(key + b"\t" + verdict + b"\n")
    out.flush()
    _emit(args, {"queried": present + absent, "present": present, "absent": absent},
          [f"queried {present + absent}: {present} present, {absent} absent"],
          stream=sys.stderr)
    return 0


def cmd_stats(args) -> int:
    sbf = _load(args.filter)
    st = sbf.stats()
    data = st.to_dict()
    c = sbf.config
    data.update(dims=str(c.dims), tau=c.tau, seed=c.master_seed)
    if not args.fill_ratios:
        data.pop("fill_ratios")
    hist = ", ".join(f"{k}:{v}" for k, v in st.chain_length_histogram().items())
    lines = [
        f"slots (P)               {st.slots}",
        f"dims                    {c.dims}",
        f"tau                     {c.tau}",
        f"seed                    {c.master_seed}",
        f"groups (Q)              {st.total_groups}",
        f"keys                    {st.total_keys}",
        f"load factor (Q/P)       {st.load_factor:.6g}",
        f"group capacity          {st.group_capacity}",
        f"available bits, literal {st.available_bits_literal:.6g}",
        f"remaining capacity      {st.remaining_capacity_items} items "
        f"({st.remaining_capacity_bits} bits)",
        f"chain lengths           max {st.max_chain_length}, mean {st.mean_chain_length:.4g}",
        f"chain histogram         {hist}",
    ]
    if args.fill_ratios:
        lines.append("fill ratios             " + " ".join(f"{r:.4f}" for r in st.fill_ratios))
    _emit(args, data, lines)
    return 0


def cmd_fpp(args) -> int:
    sbf = _load(args.filter)
    report = fpp_report(sbf)
    if args.mode == "empirical":
        if args.trials <= 0:
            raise CliError("--trials must be positive")
        # 0xFF never occurs in UTF-8, so these never collide with CLI-inserted keys
        negatives = (b"\xff" + k for k in negative_keys(args.trials, args.namespace))
        report.empirical = empirical_fpp(sbf, negatives, args.trials)
    data = report.to_dict()
    data["mode"] = args.mode
    lines = [
        f"mode                    {args.mode}",
        f"bits per filter (m)     {report.m}",
        f"keys (n)                {report.n}",
        f"groups                  {report.groups}",
        f"filter FPP, classic     {report.fpp_classic:.6g}  (mean group load)",
        f"filter FPP, exact sum   "
        + (f"{report.fpp_grandi:.6g}" if report.fpp_grandi is not None else "n/a (m > 512)"),
        f"group FPP               {report.fpp_group:.6g}",
        f"mean group FPP          {report.fpp_average:.6g}",
        f"expected query FPP      {report.fpp_query:.6g}",
    ]
    if report.empirical:
        e = report.empirical
        lines.append(f"empirical               {e.positives}/{e.trials} = {e.rate:.6g} "
                     f"(99% interval {e.lower:.3g}..{e.upper:.3g})")
    _emit(args, data, lines)
    return 0


def cmd_bench(args) -> int:
    scales = [int(float(s)) for s in args.scales.split(",")]
    if scales != sorted(scales):
        raise CliError("--scales must be sorted ascending")

    def progress(row: BenchRow) -> None:
        if not args.json:
            print(f"{row.keys:>10d}  insert p50 {row.insert_median_ns:8.0f} ns  "
                  f"p99 {row.insert_p99_ns:8.0f} ns  lookup p50 {row.lookup_median_ns:8.0f} ns  "
                  f"p99 {row.lookup_p99_ns:8.0f} ns  {row.insert_throughput:10.0f} ins/s  "
                  f"chain {row.mean_chain_length:.3f}  Q={row.total_groups}  "
                  f"alpha={row.load_factor:.3f}", flush=True)

    report = run_bench(scales, Dim3.parse(args.dims), args.slots, args.tau, args.seed,
                       args.samples, progress)
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
    elif len(report.rows) > 1:
        print(f"median latency ratio, largest/smallest scale: "
              f"insert {report.latency_ratio('insert'):.3f}, "
              f"lookup {report.latency_ratio('lookup'):.3f}")
    return 0


def _config_flags(p: argparse.ArgumentParser, slots: int = 97, dims: str = "101,103,107") -> None:
    p.add_argument("--slots", type=int, default=slots, help="prime slot count P")
    p.add_argument("--dims", default=dims, help="filter dimensions X,Y,Z (distinct primes, not 3 or 7)")
    p.add_argument("--tau", type=int, default=1, help="fullness threshold, items per cell (1..63)")
    p.add_argument("--seed", type=int, default=0, help="64-bit master seed")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable JSON output")

    parser = argparse.ArgumentParser(prog=PROG, description="Scalable 3D Bloom filter tool.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="create an empty filter image")
    _config_flags(p)
    p.add_argument("--out", required=True, help="output image path")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("insert", parents=[common], help="insert newline-delimited keys")
    p.add_argument("filter")
    p.add_argument("--keys", help="key file (default: standard input)")
    p.set_defaults(func=cmd_insert)

    p = sub.add_parser("query", parents=[common], help="query newline-delimited keys")
    p.add_argument("filter")
    p.add_argument("--keys", help="key file (default: standard input)")
    p.add_argument("--summary-only", action="store_true", help="suppress per-key verdicts")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("stats", parents=[common], help="load factor and capacity report")
    p.add_argument("filter")
    p.add_argument("--fill-ratios", action="store_true", help="include per-group fill ratios")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("fpp", parents=[common], help="false-positive report")
    p.add_argument("filter")
    p.add_argument("--mode", choices=("analytic", "empirical"), default="analytic")
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--namespace", default="fpp-neg", help="prefix for generated absent keys")
    p.set_defaults(func=cmd_fpp)

    p = sub.add_parser("bench", parents=[common], help="latency scaling benchmark")
    _config_flags(p, slots=257, dims="31,37,41")
    p.set_defaults(seed=42)
    p.add_argument("--scales", default="1e5,1e6,1e7", help="comma-separated ascending key counts")
    p.add_argument("--samples", type=int, default=100_000, help="timed operations per scale")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ConfigError, ImageError, ValueError, OSError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
