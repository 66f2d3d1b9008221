#!/usr/bin/env python3
"""Synthetic benchmark table: small-20, large-10 and large-20 over several seeds.

    python scripts/run_benchmarks.py --seeds 10 --max-active 2
    python scripts/run_benchmarks.py --seeds 10 --max-active 0   # all instances open at once
"""
import argparse
import json
import sys

from flowmine.bench import BenchConfig, run_seeds

SUITES = (("small", 20), ("large", 10), ("large", 20))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10, help="seeds 0..N-1")
    ap.add_argument("--max-active", type=int, default=2, help="0 means every instance open at once")
    ap.add_argument("--prefer", choices=("length", "energy"), default="length")
    ap.add_argument("--json", help="also write per-seed results here")
    args = ap.parse_args(argv)

    rows, dump = [], []
    for profile, n in SUITES:
        cfg = BenchConfig(profile, n, max_active=args.max_active or None, prefer=args.prefer)
        s = run_seeds(cfg, range(args.seeds))
        rows.append((cfg.name, s))
        dump += [
            {"benchmark": cfg.name, "seed": r.seed, "messages": r.messages, "ar": r.ar,
             "model_size": r.model_size, "runtime_s": r.runtime, "missing_paths": len(r.missing)}
            for r in s.results
        ]

    print(f"{'benchmark':<10} | {'RT (max)':>9} | {'Size':>5} | {'Ratio':>7} | {'min':>7} | uncovered seeds")
    for name, s in rows:
        print(f"{name:<10} | {s.max_runtime:8.2f}s | {s.mean_size:5.1f} | {100 * s.mean_ar:6.2f}% | "
              f"{100 * s.min_ar:6.2f}% | {s.uncovered_seeds or '-'}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(dump, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
