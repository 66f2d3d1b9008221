"""Seeded synthetic traces from ground-truth flow specifications.

Built-in profiles model a small SoC with components cpu0, cpu1, cache, mem,
periph and bus.  ``small`` holds the four CPU-initiated flows, ``large`` adds
six flows initiated by the peripheral, the bus and the cache.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .trace import Message, MessageRoleConfig, Trace

m = Message.parse

# Six messages of the CPU read example, numbered as in the usual walkthrough.
CPU_READ_MSGS = {
    1: m("cpu0:cache:rd:req"),
    2: m("cache:cpu0:rd:resp"),
    3: m("cpu1:cache:rd:req"),
    4: m("cache:cpu1:rd:resp"),
    5: m("cache:mem:rd:req"),
    6: m("mem:cache:rd:resp"),
}


def numbered(seq: Sequence[int], alphabet: dict[int, Message] = CPU_READ_MSGS) -> list[Message]:
    return [alphabet[i] for i in seq]


@dataclass(frozen=True)
class FlowSpec:
    id: str
    edges: frozenset[tuple[Message, Message]]
    roots: frozenset[Message]
    sinks: frozenset[Message]

    def __post_init__(self):
        self.check()

    @classmethod
    def from_paths(cls, id: str, paths: Sequence[Sequence[Message]]) -> "FlowSpec":
        edges = frozenset((a, b) for p in paths for a, b in zip(p, p[1:]))
        return cls(id, edges, frozenset(p[0] for p in paths), frozenset(p[-1] for p in paths))

    @property
    def nodes(self) -> frozenset[Message]:
        return frozenset(x for e in self.edges for x in e) | self.roots | self.sinks

    def _succ(self) -> dict[Message, list[Message]]:
        succ: dict[Message, list[Message]] = {}
        for a, b in sorted(self.edges):
            succ.setdefault(a, []).append(b)
        return succ

    def paths(self) -> list[tuple[Message, ...]]:
        succ = self._succ()
        out = []

        def walk(path):
            last = path[-1]
            if last in self.sinks:
                out.append(path)
            for nxt in succ.get(last, ()):
                walk(path + (nxt,))

        for r in sorted(self.roots):
            walk((r,))
        return out

    def check(self) -> None:
        succ = self._succ()
        state: dict[Message, int] = {}

        def visit(n):
            state[n] = 1
            for x in succ.get(n, ()):
                if state.get(x) == 1:
                    raise ValueError(f"flow {self.id}: cycle through {x}")
                if x not in state:
                    visit(x)
            state[n] = 2

        for n in sorted(self.nodes):
            if n not in state:
                visit(n)
        on_path = {x for p in self.paths() for x in p}
        stray = self.nodes - on_path
        if stray:
            raise ValueError(f"flow {self.id}: {sorted(map(str, stray))} lie on no root-to-sink path")


def roles_for(flows: Sequence[FlowSpec]) -> MessageRoleConfig:
    return MessageRoleConfig(
        frozenset().union(*(f.roots for f in flows)),
        frozenset().union(*(f.sinks for f in flows)),
    )


def _flow(id, *paths):
    return FlowSpec.from_paths(id, [[m(s) for s in p] for p in paths])


def builtin_flows(profile: str) -> list[FlowSpec]:
    """The built-in ground-truth flows; see README for the message tables."""
    if profile not in ("small", "large"):
        raise ValueError(f"unknown profile {profile!r}; expected 'small' or 'large'")
    rd = {k: str(v)[1:-1] for k, v in CPU_READ_MSGS.items()}
    flows = [
        _flow("cpu0_read", [rd[1], rd[2]], [rd[1], rd[5], rd[6], rd[2]]),
        _flow("cpu1_read", [rd[3], rd[4]], [rd[3], rd[5], rd[6], rd[4]]),
        _flow("cpu0_write",
              ["cpu0:cache:wr:req", "cache:cpu0:wr:resp"],
              ["cpu0:cache:wr:req", "cache:mem:wr:req", "mem:cache:wr:resp", "cache:cpu0:wr:resp"]),
        _flow("cpu1_write",
              ["cpu1:cache:wr:req", "cache:cpu1:wr:resp"],
              ["cpu1:cache:wr:req", "cache:mem:wr:req", "mem:cache:wr:resp", "cache:cpu1:wr:resp"]),
    ]
    if profile == "small":
        return flows
    flows += [
        _flow("dma_read",
              ["periph:bus:dma_rd:req", "bus:mem:rd:req", "mem:bus:rd:resp", "bus:periph:dma_rd:resp"]),
        _flow("dma_write",
              ["periph:bus:dma_wr:req", "bus:mem:wr:req", "mem:bus:wr:resp", "bus:periph:dma_wr:resp"]),
        _flow("irq",
              ["periph:bus:irq:req", "bus:cpu0:irq:req", "cpu0:bus:irq:resp", "bus:periph:irq:resp"],
              ["periph:bus:irq:req", "bus:cpu1:irq:req", "cpu1:bus:irq:resp", "bus:periph:irq:resp"]),
        _flow("writeback",
              ["cache:bus:wb:req", "bus:mem:wb:req", "mem:bus:wb:resp", "bus:cache:wb:resp"]),
        _flow("snoop_read",
              ["periph:bus:snp_rd:req", "bus:cache:snp:req", "cache:bus:snp:resp", "bus:periph:snp_rd:resp"],
              ["periph:bus:snp_rd:req", "bus:cache:snp:req", "cache:bus:snp:resp",
               "bus:mem:fill:req", "mem:bus:fill:resp", "bus:periph:snp_rd:resp"]),
        _flow("flush",
              ["periph:bus:flush:req", "bus:cache:flush:req", "cache:bus:flush:resp", "bus:periph:flush:resp"],
              ["periph:bus:flush:req", "bus:cache:flush:req", "cache:bus:flush:resp",
               "bus:mem:flush:req", "mem:bus:flush:resp", "bus:periph:flush:resp"]),
    ]
    return flows


@dataclass(frozen=True)
class Assignment:
    flow: str
    instance: int
    step: int


@dataclass
class GroundTruth:
    assignments: list[Assignment]
    instances: list[tuple[str, int, tuple[Message, ...]]] = field(default_factory=list)

    def instantiated_paths(self) -> set[tuple[Message, ...]]:
        return {p for _, _, p in self.instances}

    def paths_in(self, trace: Trace) -> set[tuple[Message, ...]]:
        """Instantiated paths rebuilt from the per-event assignments."""
        steps: dict[tuple[str, int], list[tuple[int, Message]]] = {}
        for a, m in zip(self.assignments, trace.messages):
            steps.setdefault((a.flow, a.instance), []).append((a.step, m))
        return {tuple(m for _, m in sorted(v)) for v in steps.values()}

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps({"pos": pos, "flow": a.flow, "instance": a.instance, "step": a.step}) + "\n"
            for pos, a in enumerate(self.assignments)
        )

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def read(cls, path: str | Path) -> "GroundTruth":
        rows = [json.loads(line) for line in Path(path).read_text(encoding="utf-8").splitlines() if line]
        rows.sort(key=lambda r: r["pos"])
        return cls([Assignment(r["flow"], r["instance"], r["step"]) for r in rows])


def generate(
    flows: Sequence[FlowSpec],
    instances_per_flow: int,
    seed: int,
    mode: str = "random_interleave",
    max_active: int | None = None,
    trace_id: str = "synthetic",
) -> tuple[Trace, GroundTruth]:
    """Interleave ``instances_per_flow`` instances of every flow into one trace.

    Each instance follows one root-to-sink path of its flow, picked uniformly.
    ``random_interleave`` repeatedly emits the next message of a uniformly
    chosen unfinished instance; ``round_robin`` cycles through them.  With
    ``max_active`` only that many instances are open at once; instances are
    started in a shuffled order as others finish.
    """
    if not flows:
        raise ValueError("no flows")
    if instances_per_flow <= 0:
        raise ValueError("instances_per_flow must be positive")
    if mode not in ("random_interleave", "round_robin"):
        raise ValueError(f"unknown interleave mode {mode!r}")
    if max_active is not None and max_active <= 0:
        raise ValueError("max_active must be positive")
    rng = random.Random(seed)
    instances = []
    for f in flows:
        paths = f.paths()
        for k in range(instances_per_flow):
            instances.append((f.id, k, paths[rng.randrange(len(paths))]))

    pending = list(range(len(instances)))
    if max_active is not None:
        rng.shuffle(pending)
        pending.reverse()  # pop() from the end yields the shuffled order
        active = [pending.pop() for _ in range(min(max_active, len(pending)))]
    else:
        active, pending = pending, []
    step = [0] * len(instances)
    msgs: list[Message] = []
    truth: list[Assignment] = []
    rr = 0
    while active:
        if mode == "round_robin":
            slot = rr % len(active)
        else:
            slot = rng.randrange(len(active))
        idx = active[slot]
        fid, k, path = instances[idx]
        msgs.append(path[step[idx]])
        truth.append(Assignment(fid, k, step[idx]))
        step[idx] += 1
        rr = slot + 1
        if step[idx] == len(path):
            if pending:
                active[slot] = pending.pop()
            else:
                active[slot] = active[-1]
                active.pop()
                rr = slot
    return Trace(tuple(msgs), trace_id), GroundTruth(truth, instances)
