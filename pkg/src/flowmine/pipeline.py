"""End-to-end mining: local mining, global mining, position-aware evaluation."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

from .evaluation import AcceptanceReport, FlowModel, evaluate
from .graph import DEFAULT_PATH_CAP, RankedPathPool, global_mine
from .local import LocalMiningResult, local_mine
from .trace import MessageRoleConfig, Trace

ABLATIONS = ("no_slicing", "no_positional")


@dataclass
class MiningRun:
    local: LocalMiningResult
    rpp: RankedPathPool
    report: AcceptanceReport
    model: FlowModel
    runtime: float

    @property
    def ar(self) -> float:
        return self.report.ar


def mine(
    traces: Sequence[Trace],
    cfg: MessageRoleConfig,
    ablate: str | None = None,
    path_cap: int = DEFAULT_PATH_CAP,
    prefer: str = "length",
) -> MiningRun:
    if ablate is not None and ablate not in ABLATIONS:
        raise ValueError(f"unknown ablation {ablate!r}; expected one of {ABLATIONS}")
    cfg.check()
    t0 = time.perf_counter()
    local = local_mine(traces, slicing=(ablate != "no_slicing"))
    rpp = global_mine(traces, local, cfg, path_cap)
    mode = "no_positional" if ablate == "no_positional" else "positional"
    report, model = evaluate(traces, rpp, local, cfg, mode=mode, prefer=prefer)
    return MiningRun(local, rpp, report, model, time.perf_counter() - t0)


def ablate(traces: Sequence[Trace], mode: str, cfg: MessageRoleConfig) -> AcceptanceReport:
    return mine(traces, cfg, ablate=mode).report
