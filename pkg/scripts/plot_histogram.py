#!/usr/bin/env python3
"""Bar chart of accepted instances per path length from one or more report.json files.

    python scripts/plot_histogram.py out/small/report.json out/large/report.json -o hist.png
"""
import argparse
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("reports", nargs="+")
    ap.add_argument("-o", "--out", default="histogram.png")
    args = ap.parse_args(argv)

    hists = {}
    for p in args.reports:
        doc = json.loads(Path(p).read_text(encoding="utf-8"))
        hists[Path(p).parent.name or p] = {r["path_length"]: r["instance_count"] for r in doc["histogram"]}
    lengths = sorted({k for h in hists.values() for k in h})
    width = 0.8 / max(len(hists), 1)

    fig, ax = plt.subplots(figsize=(6, 3.5))
    for k, (name, h) in enumerate(hists.items()):
        xs = [x + (k - (len(hists) - 1) / 2) * width for x in range(len(lengths))]
        ax.bar(xs, [h.get(n, 0) for n in lengths], width, label=name)
    ax.set_xticks(range(len(lengths)), [str(n) for n in lengths])
    ax.set_xlabel("path length (messages)")
    ax.set_ylabel("accepted instances")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
