"""Position-aware single-pass evaluation and incremental model construction.

For every unconsumed initial event the evaluator bounds a sub-trace by the
position of the terminal event that local mining paired with it, builds the
sub-causality graph of that window, intersects its paths with the ranked
path pool and accepts the best embedding.  Accepted events are consumed and
never revisited.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .graph import RankedPathPool, enumerate_paths, grow_graph
from .local import LocalMiningResult
from .trace import Message, MessageRoleConfig, Trace, causal

MODES = ("positional", "no_positional")
# Candidate ranking after the orphan count: "length" tries the longest path
# first and uses energy to break ties, "energy" does the reverse.
PREFER = ("length", "energy")


@dataclass(frozen=True)
class SubTrace:
    start: int
    end: int
    positions: tuple[int, ...]
    messages: tuple[Message, ...]

    def __len__(self) -> int:
        return len(self.positions)


@dataclass
class FlowModel:
    flows: dict[tuple[Message, ...], int] = field(default_factory=dict)

    def add(self, path: tuple[Message, ...]) -> None:
        self.flows[path] = self.flows.get(path, 0) + 1

    def __len__(self) -> int:
        return len(self.flows)

    def __contains__(self, path) -> bool:
        return tuple(path) in self.flows

    def sequences(self) -> set[tuple[Message, ...]]:
        return set(self.flows)

    def to_json(self, rpp: RankedPathPool | None = None) -> dict:
        rows = []
        for path in sorted(self.flows, key=lambda p: (len(p), p)):
            row = {"messages": [str(m) for m in path], "length": len(path), "instances": self.flows[path]}
            if rpp is not None:
                row["energy"] = rpp.energy(path)
            rows.append(row)
        return {"size": len(self.flows), "flows": rows}

    def to_dot(self) -> str:
        nodes = sorted({m for p in self.flows for m in p})
        ids = {m: f"n{i}" for i, m in enumerate(nodes)}
        lines = ["digraph model {"]
        for m in nodes:
            lines.append(f'  {ids[m]} [label="{m}"];')
        for k, path in enumerate(sorted(self.flows)):
            for a, b in zip(path, path[1:]):
                lines.append(f'  {ids[a]} -> {ids[b]} [label="f{k}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass
class TraceResult:
    id: str
    length: int
    accepted: list[int]
    unaccepted: list[int]
    instances: list[tuple[tuple[Message, ...], tuple[int, ...]]]

    @property
    def ratio(self) -> float:
        return len(self.accepted) / self.length if self.length else 0.0


@dataclass
class AcceptanceReport:
    traces: list[TraceResult]

    @property
    def ar(self) -> float:
        """Message-weighted acceptance ratio over all traces."""
        total = sum(t.length for t in self.traces)
        return sum(len(t.accepted) for t in self.traces) / total if total else 0.0

    @property
    def ar_mean(self) -> float:
        """Mean of the per-trace ratios."""
        return sum(t.ratio for t in self.traces) / len(self.traces) if self.traces else 0.0

    def histogram(self) -> dict[int, int]:
        counts = Counter(len(path) for t in self.traces for path, _ in t.instances)
        return dict(sorted(counts.items()))

    def selected(self, trace_index: int = 0) -> list[tuple[Message, ...]]:
        return [path for path, _ in self.traces[trace_index].instances]

    def to_json(self) -> dict:
        return {
            "acceptance_ratio": self.ar,
            "acceptance_ratio_trace_mean": self.ar_mean,
            "messages": sum(t.length for t in self.traces),
            "accepted": sum(len(t.accepted) for t in self.traces),
            "histogram": [{"path_length": k, "instance_count": v} for k, v in self.histogram().items()],
            "traces": [
                {
                    "id": t.id,
                    "length": t.length,
                    "ratio": t.ratio,
                    "accepted": t.accepted,
                    "unaccepted": t.unaccepted,
                }
                for t in self.traces
            ],
        }


def mbp_index(local: LocalMiningResult, trace_index: int):
    """(pattern, src_pos) -> dst_pos and src_pos -> [dst_pos] for one trace."""
    by_pattern: dict[tuple, int] = {}
    partners: dict[int, list[int]] = defaultdict(list)
    for mi in local.matches:
        if mi.trace_index != trace_index:
            continue
        for s, d in mi.pairs:
            by_pattern[(mi.pattern, s)] = d
            partners[s].append(d)
    return by_pattern, partners


def terminal_bound(msgs: Sequence[Message], i: int, partners: dict[int, list[int]], terminals, consumed=None) -> int | None:
    """Position of the terminal reached from ``i`` through matched pairs.

    The nearest terminal wins when several are reachable.  Terminals already
    marked in ``consumed`` are skipped.
    """
    best = None
    seen = {i}
    q = deque([i])
    while q:
        p = q.popleft()
        for d in partners.get(p, ()):
            if d in seen:
                continue
            seen.add(d)
            if msgs[d] in terminals:
                if consumed is not None and consumed[d]:
                    continue
                if best is None or d < best:
                    best = d
            else:
                q.append(d)
    return best


def extract_subtrace(
    trace: Trace,
    i: int,
    partners: dict[int, list[int]],
    consumed,
    cfg: MessageRoleConfig,
) -> SubTrace | None:
    msgs = trace.messages
    if msgs[i] not in cfg.initial or consumed[i]:
        return None
    j = terminal_bound(msgs, i, partners, cfg.terminal, consumed)
    if j is None:
        return None
    pos = tuple(p for p in range(i, j + 1) if not consumed[p])
    return SubTrace(i, j, pos, tuple(msgs[p] for p in pos))


def _order_edges(types: Sequence[Message]):
    first: dict[Message, int] = {}
    last: dict[Message, int] = {}
    for k, m in enumerate(types):
        first.setdefault(m, k)
        last[m] = k
    return first, last


class _Window:
    """Per-run caches keyed by the message-type sequence of a window."""

    def __init__(self, cfg: MessageRoleConfig, strict: bool = True):
        self.cfg = cfg
        self.strict = strict
        self.paths = lru_cache(maxsize=65536)(self._paths)
        self.orphans = lru_cache(maxsize=65536)(self._orphans)

    def graph(self, types: Sequence[Message]):
        first, last = _order_edges(types)
        return grow_graph(
            first,
            self.cfg.initial,
            self.cfg.terminal,
            allowed=lambda a, b: first[a] < last[b],
            strict=self.strict,
        )

    def _paths(self, types: tuple[Message, ...]) -> tuple[tuple[Message, ...], ...]:
        return tuple(enumerate_paths(self.graph(types)))

    def _orphans(self, types: tuple[Message, ...]) -> int:
        """Types in the window that lie on no initial-to-terminal chain."""
        if not types:
            return 0
        first, last = _order_edges(types)
        by_src: dict[str, list[Message]] = defaultdict(list)
        for m in first:
            by_src[m.src].append(m)
        succ = defaultdict(list)
        pred = defaultdict(list)
        strict = self.strict
        for a in first:
            fa = first[a]
            for b in by_src.get(a.dest, ()):
                if b is not a and fa < last[b] and causal(a, b, strict):
                    succ[a].append(b)
                    pred[b].append(a)
        fwd = _closure([m for m in first if m in self.cfg.initial], succ)
        bwd = _closure([m for m in first if m in self.cfg.terminal], pred)
        return sum(1 for m in first if not (m in fwd and m in bwd))


def _closure(start, adj) -> set:
    seen = set(start)
    stack = list(start)
    while stack:
        n = stack.pop()
        for m in adj.get(n, ()):
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return seen


def build_sub_causality_graph(s: SubTrace, cfg: MessageRoleConfig, strict: bool = True):
    return _Window(cfg, strict).graph(s.messages)


EMBED_CAP = 32


def embeddings(path: Sequence[Message], s: SubTrace, by_pattern: dict | None = None, cap: int = EMBED_CAP):
    """Order-preserving placements of ``path`` in the window.

    The first message sits on the window's first event and the last one on
    its bounding terminal.  Matched pairs from local mining are tried before
    other occurrences, so the first placement yielded follows them wherever
    possible.  At most ``cap`` placements are produced.
    """
    pos, msgs = s.positions, s.messages
    n, last = len(pos), len(path) - 1
    if not pos or msgs[0] != path[0] or msgs[-1] != path[-1] or n < len(path):
        return
    index = {p: k for k, p in enumerate(pos)}
    where: dict[Message, list[int]] = defaultdict(list)
    for k in range(1, n - 1):
        where[msgs[k]].append(k)
    out = [0]
    produced = 0

    def options(step):
        if step == last:
            return [n - 1]
        want = path[step]
        k = out[-1]
        rest = n - 1 - (last - step)
        opts = [q for q in where.get(want, ()) if k < q < rest + 1]
        if by_pattern is not None:
            d = by_pattern.get(((path[step - 1], want), pos[k]))
            q = index.get(d) if d is not None else None
            if q is not None and q in opts:
                opts.remove(q)
                opts.insert(0, q)
        return opts

    def walk(step):
        nonlocal produced
        if step > last:
            produced += 1
            yield tuple(pos[k] for k in out)
            return
        for q in options(step):
            if q <= out[-1]:
                continue
            out.append(q)
            yield from walk(step + 1)
            out.pop()
            if produced >= cap:
                return

    yield from walk(1)


def embed(path: Sequence[Message], s: SubTrace, by_pattern: dict | None = None) -> tuple[int, ...] | None:
    """The preferred placement of ``path`` in the window, or None."""
    return next(embeddings(path, s, by_pattern), None)


def _matched_steps(path, placed, by_pattern) -> int:
    if by_pattern is None:
        return 0
    return sum(
        1 for e, p, q in zip(zip(path, path[1:]), placed, placed[1:]) if by_pattern.get((e, p)) == q
    )


def select_candidate(
    s: SubTrace,
    rpp: RankedPathPool,
    window: _Window,
    by_pattern=None,
    beyond=(),
    prefer: str = "length",
):
    """Pick (path, positions) for the window or None.

    Each finite-energy path that starts and ends with the window's bounding
    messages is tried at several placements.  Preference: fewest orphaned
    message types left behind, longest, lowest energy, most steps that follow
    matched pairs, then path and placement order (``prefer="energy"`` swaps
    the length and energy criteria).  ``beyond`` holds the
    unconsumed message types after the window that still belong to instances
    opened inside it; they take part in the orphan check only.
    """
    head, end = s.messages[0], s.messages[-1]
    best = None
    for path in window.paths(s.messages):
        if path[0] != head or path[-1] != end:
            continue
        e = rpp.energy(path)
        if not math.isfinite(e):
            continue
        for placed in embeddings(path, s, by_pattern):
            taken = set(placed)
            rest = tuple(m for p, m in zip(s.positions, s.messages) if p not in taken) + tuple(beyond)
            orph = window.orphans(rest)
            size = -len(path)
            first, second = (size, e) if prefer == "length" else (e, size)
            key = (orph, first, second, -_matched_steps(path, placed, by_pattern), path, placed)
            if best is None or key < best[0]:
                best = (key, path, placed)
    if best is None:
        return None
    return best[1], best[2]


BEYOND_CAP = 256


def _pending_beyond(msgs, s: SubTrace, partners, consumed, cfg, bounds) -> tuple[Message, ...]:
    """Unconsumed message types after the window that belong to instances
    opened inside it, following later initials transitively, up to
    ``BEYOND_CAP`` positions past the window."""
    limit = min(len(msgs) - 1, s.end + BEYOND_CAP)
    reach = s.end
    scan = list(s.positions[1:])
    k = 0
    while k < len(scan):
        p = scan[k]
        k += 1
        if msgs[p] not in cfg.initial or consumed[p]:
            continue
        if p not in bounds:
            bounds[p] = terminal_bound(msgs, p, partners, cfg.terminal)
        b = bounds[p]
        if b is not None and b > reach:
            b = min(b, limit)
            scan.extend(range(reach + 1, b + 1))
            reach = b
    return tuple(msgs[p] for p in range(s.end + 1, reach + 1) if not consumed[p])


def _evaluate_positional(t: Trace, tidx: int, rpp, local, cfg, window, model, prefer) -> TraceResult:
    msgs = t.messages
    n = len(msgs)
    by_pattern, partners = mbp_index(local, tidx)
    consumed = bytearray(n)
    instances = []
    initial = cfg.initial
    bounds: dict[int, int | None] = {}
    for i in range(n):
        if consumed[i] or msgs[i] not in initial:
            continue
        s = extract_subtrace(t, i, partners, consumed, cfg)
        if s is None:
            continue
        beyond = _pending_beyond(msgs, s, partners, consumed, cfg, bounds)
        choice = select_candidate(s, rpp, window, by_pattern, beyond, prefer)
        if choice is None:
            continue
        path, placed = choice
        for p in placed:
            consumed[p] = 1
        instances.append((path, placed))
        model.add(path)
    return _result(t, consumed, instances)


def _evaluate_sequential(t: Trace, tidx: int, rpp, cfg, model) -> TraceResult:
    """Ablation without positional indexing: the window ends at the first
    later terminal that can close a pooled path from this initial, and
    messages are claimed greedily in trace order."""
    msgs = t.messages
    n = len(msgs)
    finite = [p.msgs for p in rpp.finite()]
    prefixes: dict[Message, set] = defaultdict(set)
    closers: dict[Message, set] = defaultdict(set)
    for p in finite:
        closers[p[0]].add(p[-1])
        for k in range(1, len(p) + 1):
            prefixes[p[0]].add(p[:k])
    full = set(finite)
    consumed = bytearray(n)
    instances = []
    for i in range(n):
        head = msgs[i]
        if consumed[i] or head not in cfg.initial or head not in closers:
            continue
        j = next((q for q in range(i + 1, n) if not consumed[q] and msgs[q] in closers[head]), None)
        if j is None:
            continue
        seq = (head,)
        placed = [i]
        for q in range(i + 1, j + 1):
            if consumed[q]:
                continue
            ext = seq + (msgs[q],)
            if ext in prefixes[head]:
                seq = ext
                placed.append(q)
                if q == j:
                    break
        if placed[-1] == j and seq in full:
            for p in placed:
                consumed[p] = 1
            instances.append((seq, tuple(placed)))
            model.add(seq)
    return _result(t, consumed, instances)


def _result(t: Trace, consumed, instances) -> TraceResult:
    accepted = [p for p in range(len(t)) if consumed[p]]
    unaccepted = [p for p in range(len(t)) if not consumed[p]]
    return TraceResult(t.id, len(t), accepted, unaccepted, instances)


def evaluate(
    traces: Sequence[Trace],
    rpp: RankedPathPool,
    local: LocalMiningResult,
    cfg: MessageRoleConfig,
    mode: str = "positional",
    strict: bool = True,
    prefer: str = "length",
) -> tuple[AcceptanceReport, FlowModel]:
    if mode not in MODES:
        raise ValueError(f"unknown evaluation mode {mode!r}")
    if prefer not in PREFER:
        raise ValueError(f"unknown candidate preference {prefer!r}; expected one of {PREFER}")
    model = FlowModel()
    window = _Window(cfg, strict)
    results = []
    for tidx, t in enumerate(traces):
        if mode == "positional":
            results.append(_evaluate_positional(t, tidx, rpp, local, cfg, window, model, prefer))
        else:
            results.append(_evaluate_sequential(t, tidx, rpp, cfg, model))
    return AcceptanceReport(results), model
