"""Synthetic benchmark runs: generate a trace, mine it, score it against the
ground truth."""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field

from .pipeline import mine
from .synth import builtin_flows, generate, roles_for


@dataclass(frozen=True)
class BenchConfig:
    profile: str = "small"
    instances: int = 20
    max_active: int | None = 2
    mode: str = "random_interleave"
    prefer: str = "length"

    @property
    def name(self) -> str:
        return f"{self.profile}-{self.instances}"


@dataclass
class BenchResult:
    config: BenchConfig
    seed: int
    messages: int
    ar: float
    model_size: int
    runtime: float  # generation excluded
    instantiated: int
    missing: list = field(default_factory=list)

    @property
    def covered(self) -> bool:
        return not self.missing


def run_benchmark(cfg: BenchConfig, seed: int) -> BenchResult:
    flows = builtin_flows(cfg.profile)
    trace, truth = generate(flows, cfg.instances, seed, mode=cfg.mode, max_active=cfg.max_active)
    t0 = time.perf_counter()
    run = mine([trace], roles_for(flows), prefer=cfg.prefer)
    runtime = time.perf_counter() - t0
    paths = truth.instantiated_paths()
    missing = sorted(paths - run.model.sequences())
    return BenchResult(cfg, seed, len(trace), run.ar, len(run.model), runtime, len(paths), missing)


@dataclass
class BenchSummary:
    config: BenchConfig
    results: list[BenchResult]

    @property
    def mean_ar(self) -> float:
        return statistics.fmean(r.ar for r in self.results)

    @property
    def min_ar(self) -> float:
        return min(r.ar for r in self.results)

    @property
    def max_runtime(self) -> float:
        return max(r.runtime for r in self.results)

    @property
    def mean_size(self) -> float:
        return statistics.fmean(r.model_size for r in self.results)

    @property
    def uncovered_seeds(self) -> list[int]:
        return [r.seed for r in self.results if not r.covered]


def run_seeds(cfg: BenchConfig, seeds) -> BenchSummary:
    return BenchSummary(cfg, [run_benchmark(cfg, s) for s in seeds])
