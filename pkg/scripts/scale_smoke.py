#!/usr/bin/env python3
"""Time each pipeline stage on one large generated trace.

    python scripts/scale_smoke.py --messages 1000000
"""
import argparse
import sys
import time

from flowmine.evaluation import evaluate
from flowmine.graph import global_mine
from flowmine.local import local_mine
from flowmine.synth import builtin_flows, generate, roles_for


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--messages", type=int, default=1_000_000)
    ap.add_argument("--profile", choices=("small", "large"), default="large")
    ap.add_argument("--max-active", type=int, default=2, help="0 means every instance open at once")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    flows = builtin_flows(args.profile)
    cfg = roles_for(flows)
    mean_len = sum(sum(map(len, f.paths())) / len(f.paths()) for f in flows)
    per_flow = int(1.01 * args.messages / mean_len) + 1

    t0 = time.perf_counter()
    trace, _ = generate(flows, per_flow, args.seed, max_active=args.max_active or None)
    t1 = time.perf_counter()
    print(f"generate  {t1 - t0:6.1f}s  {len(trace)} messages", flush=True)
    local = local_mine([trace])
    t2 = time.perf_counter()
    print(f"local     {t2 - t1:6.1f}s  {len(local.valid)} valid patterns", flush=True)
    rpp = global_mine([trace], local, cfg)
    t3 = time.perf_counter()
    print(f"global    {t3 - t2:6.1f}s  {len(rpp)} candidate paths", flush=True)
    report, model = evaluate([trace], rpp, local, cfg)
    t4 = time.perf_counter()
    print(f"evaluate  {t4 - t3:6.1f}s  AR {report.ar:.4f}, model size {len(model)}")
    print(f"mine total {t4 - t1:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
