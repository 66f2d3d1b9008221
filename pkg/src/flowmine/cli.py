"""Command-line front end: ``flowmine generate | mine | report``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .evaluation import PREFER
from .graph import DEFAULT_PATH_CAP, PathLimitExceeded, graph_to_dot
from .pipeline import ABLATIONS, mine
from .synth import GroundTruth, builtin_flows, generate, roles_for
from .trace import MessageRoleConfig, TraceParseError, read_trace, write_trace

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_roles(path: str) -> MessageRoleConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read role config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"role config {path} is not valid JSON: {exc}") from None
    try:
        return MessageRoleConfig.from_json(data)
    except ValueError as exc:
        raise UsageError(f"role config {path}: {exc}") from None


def cmd_generate(args) -> int:
    flows = builtin_flows(args.profile)
    trace, truth = generate(
        flows, args.instances, args.seed, mode=args.mode, max_active=args.max_active,
        trace_id=f"{args.profile}-{args.instances}-s{args.seed}",
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_trace(trace, out / "trace.txt")
    truth.write(out / "truth.jsonl")
    (out / "roles.json").write_text(_dump(roles_for(flows).to_json()), encoding="utf-8")
    print(f"{len(trace)} messages, {len(truth.instances)} instances -> {out}")
    return EXIT_OK


def cmd_mine(args) -> int:
    cfg = load_roles(args.roles)
    traces = []
    for p in args.traces:
        try:
            traces.append(read_trace(p))
        except OSError as exc:
            raise DataError(f"cannot read trace {p}: {exc}") from None
        except TraceParseError as exc:
            raise DataError(f"{p}: {exc}") from None
    try:
        run = mine(traces, cfg, ablate=args.ablate, path_cap=args.path_cap, prefer=args.prefer)
    except PathLimitExceeded as exc:
        raise DataError(str(exc)) from None
    except ValueError as exc:
        # raised for role sets that do not fit the traces
        raise DataError(str(exc)) from None

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = run.report.to_json()
    report["model_size"] = len(run.model)
    report["ablation"] = args.ablate
    report["prefer"] = args.prefer
    if args.truth:
        report["ground_truth"] = truth_coverage(args.truth, traces, run.model)
    (out / "report.json").write_text(_dump(report), encoding="utf-8")
    (out / "model.json").write_text(_dump(run.model.to_json(run.rpp)), encoding="utf-8")
    # wall-clock time lives apart from report.json so reruns stay byte-identical
    (out / "run_meta.json").write_text(_dump({"runtime_s": round(run.runtime, 3)}), encoding="utf-8")
    if args.patterns:
        (out / "patterns.json").write_text(_dump(run.local.to_json()), encoding="utf-8")
    if args.dot:
        (out / "causality.dot").write_text(graph_to_dot(run.rpp.graph), encoding="utf-8")
        (out / "model.dot").write_text(run.model.to_dot(), encoding="utf-8")

    print(f"AR {100 * run.ar:.2f}%")
    print(f"model size {len(run.model)}")
    if args.truth:
        gt = report["ground_truth"]
        print(f"ground-truth paths mined {gt['mined']}/{gt['instantiated']}")
    return EXIT_OK


def truth_coverage(path: str, traces, model) -> dict:
    if len(traces) != 1:
        raise UsageError("--truth needs exactly one trace")
    try:
        truth = GroundTruth.read(path)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot read ground truth {path}: {exc}") from None
    if len(truth.assignments) != len(traces[0]):
        raise DataError(f"ground truth {path} has {len(truth.assignments)} rows, trace has {len(traces[0])}")
    paths = truth.paths_in(traces[0])
    missing = sorted(paths - model.sequences())
    return {
        "instantiated": len(paths),
        "mined": len(paths) - len(missing),
        "missing": [[str(m) for m in p] for p in missing],
    }


def histogram_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path_length", "instance_count"])
    for row in sorted(report.get("histogram", []), key=lambda r: r["path_length"]):
        w.writerow([row["path_length"], row["instance_count"]])
    return buf.getvalue()


def summary_table(report: dict, runtime: float | None) -> str:
    rt = "n/a" if runtime is None else f"{runtime:.2f}s"
    cells = [("RT", rt), ("Size", str(report["model_size"])), ("Ratio", f"{100 * report['acceptance_ratio']:.2f}%")]
    head = " | ".join(k.ljust(max(len(k), len(v))) for k, v in cells)
    body = " | ".join(v.ljust(max(len(k), len(v))) for k, v in cells)
    return f"{head}\n{body}\n"


def cmd_report(args) -> int:
    src = Path(args.report)
    try:
        report = json.loads(src.read_text(encoding="utf-8"))
        report["acceptance_ratio"], report["model_size"], report["histogram"]
    except OSError as exc:
        raise DataError(f"cannot read report {src}: {exc}") from None
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"malformed report {src}: {exc!r}") from None
    runtime = None
    meta = src.with_name("run_meta.json")
    if meta.exists():
        runtime = json.loads(meta.read_text(encoding="utf-8")).get("runtime_s")
    out = Path(args.out) if args.out else src.parent
    out.mkdir(parents=True, exist_ok=True)
    try:
        (out / "histogram.csv").write_text(histogram_csv(report), encoding="utf-8")
    except (KeyError, TypeError) as exc:
        raise DataError(f"malformed histogram in {src}: {exc!r}") from None
    sys.stdout.write(summary_table(report, runtime))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="flowmine", description="Mine message flows from interleaved SoC traces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a synthetic benchmark trace with ground truth")
    g.add_argument("--profile", choices=("small", "large"), default="small")
    g.add_argument("--instances", type=int, default=20, help="instances per flow")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--mode", choices=("random_interleave", "round_robin"), default="random_interleave")
    g.add_argument("--max-active", type=int, default=2,
                   help="instances open at once; 0 opens all of them together (default 2)")
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_generate)

    m = sub.add_parser("mine", help="mine flows and evaluate them against the traces")
    m.add_argument("--traces", nargs="+", required=True)
    m.add_argument("--roles", required=True, help='JSON file {"initial": [...], "terminal": [...]}')
    m.add_argument("--ablate", choices=ABLATIONS)
    m.add_argument("--prefer", choices=PREFER, default="length",
                   help="after the orphan count, rank candidates by length or by energy first")
    m.add_argument("--path-cap", type=int, default=DEFAULT_PATH_CAP)
    m.add_argument("--truth", help="ground-truth sidecar from generate; adds path coverage to the report")
    m.add_argument("--dot", action="store_true", help="also write causality.dot and model.dot")
    m.add_argument("--patterns", action="store_true", help="also write the local binary patterns")
    m.add_argument("--out", required=True, help="output directory")
    m.set_defaults(func=cmd_mine)

    r = sub.add_parser("report", help="histogram CSV and summary table from report.json")
    r.add_argument("report")
    r.add_argument("--out", help="directory for histogram.csv (default: next to the report)")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "generate":
        if args.instances <= 0:
            parser.error("--instances must be positive")
        if args.max_active < 0:
            parser.error("--max-active must be >= 0")
        args.max_active = args.max_active or None
    if args.command == "mine" and args.path_cap <= 0:
        parser.error("--path-cap must be positive")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"flowmine: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"flowmine: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"flowmine: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
