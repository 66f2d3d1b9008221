"""Global mining: causality graph, path enumeration, path energy and ranking."""
from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .local import LocalMiningResult, Rel, fifo_pairs
from .trace import Message, MessageRoleConfig, Trace, causal

DEFAULT_PATH_CAP = 10**6


class PathLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class EdgeInfo:
    fc: float = 0.0
    bc: float = 0.0
    valid: bool = False
    support: float = 0.0  # mean matched valid-pattern instances per trace; 0 unless valid
    gap: float = 0.0  # mean positional distance of the edge's instance pairs

    @property
    def conf(self) -> float:
        return (self.fc + self.bc) / 2


@dataclass
class CausalityGraph:
    nodes: set[Message]
    edges: dict[Rel, EdgeInfo]
    roots: frozenset[Message]
    terminals: frozenset[Message]

    def successors(self) -> dict[Message, list[Message]]:
        succ: dict[Message, list[Message]] = defaultdict(list)
        for a, b in sorted(self.edges):
            succ[a].append(b)
        return succ

    def is_acyclic(self) -> bool:
        indeg = {n: 0 for n in self.nodes}
        for _, b in self.edges:
            indeg[b] += 1
        succ = self.successors()
        q = deque(n for n, d in indeg.items() if d == 0)
        seen = 0
        while q:
            n = q.popleft()
            seen += 1
            for m in succ.get(n, ()):
                indeg[m] -= 1
                if indeg[m] == 0:
                    q.append(m)
        return seen == len(self.nodes)

    def copy(self) -> "CausalityGraph":
        return CausalityGraph(set(self.nodes), dict(self.edges), self.roots, self.terminals)


@dataclass(frozen=True)
class CandidatePath:
    msgs: tuple[Message, ...]
    energy: float = math.inf

    @property
    def edges(self) -> list[Rel]:
        return list(zip(self.msgs, self.msgs[1:]))

    @property
    def finite(self) -> bool:
        return math.isfinite(self.energy)

    def __len__(self) -> int:
        return len(self.msgs)


def rank_key(p: CandidatePath):
    return (p.energy, -len(p.msgs), p.msgs)


@dataclass
class RankedPathPool:
    paths: list[CandidatePath]
    graph: CausalityGraph | None = None

    def __post_init__(self):
        self.paths = sorted(self.paths, key=rank_key)
        self._by_seq = {p.msgs: p for p in self.paths}

    def __iter__(self) -> Iterator[CandidatePath]:
        return iter(self.paths)

    def __len__(self) -> int:
        return len(self.paths)

    def get(self, msgs: Sequence[Message]) -> CandidatePath | None:
        return self._by_seq.get(tuple(msgs))

    def energy(self, msgs: Sequence[Message]) -> float:
        p = self.get(msgs)
        return math.inf if p is None else p.energy

    def finite(self) -> list[CandidatePath]:
        return [p for p in self.paths if p.finite]


def _reaches(succ: dict[Message, set[Message]], src: Message, dst: Message) -> bool:
    if src == dst:
        return True
    stack = [src]
    seen = {src}
    while stack:
        n = stack.pop()
        for m in succ.get(n, ()):
            if m == dst:
                return True
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return False


def grow_graph(
    alphabet: Iterable[Message],
    roots: Iterable[Message],
    terminals: Iterable[Message],
    allowed=None,
    strict: bool = True,
) -> CausalityGraph:
    """Breadth-first expansion from each root over structural causality.

    Terminals are not expanded; an edge is skipped if its target already
    reaches its source.  ``allowed(a, b)`` can veto edges (used for
    order-aware sub-graphs).
    """
    alphabet = sorted(set(alphabet))
    terminals = frozenset(terminals) & set(alphabet)
    roots = sorted(set(roots) & set(alphabet))
    by_src: dict[str, list[Message]] = defaultdict(list)
    for m in alphabet:
        by_src[m.src].append(m)
    succ: dict[Message, set[Message]] = defaultdict(set)
    nodes: set[Message] = set()
    edges: dict[Rel, EdgeInfo] = {}
    expanded: set[Message] = set()
    for r in roots:
        nodes.add(r)
        q = deque([r])
        while q:
            a = q.popleft()
            if a in expanded or a in terminals:
                continue
            expanded.add(a)
            for b in by_src.get(a.dest, ()):
                if b == a or not causal(a, b, strict):
                    continue
                if allowed is not None and not allowed(a, b):
                    continue
                if _reaches(succ, b, a):
                    continue
                succ[a].add(b)
                edges[(a, b)] = EdgeInfo()
                nodes.add(b)
                q.append(b)
    return CausalityGraph(nodes, edges, frozenset(roots), terminals & nodes)


def build_causality_graph(traces: Sequence[Trace], cfg: MessageRoleConfig, strict: bool = True) -> CausalityGraph:
    cfg.check()
    alphabet: set[Message] = set()
    for t in traces:
        alphabet |= t.alphabet
    missing = sorted(cfg.initial - alphabet)
    if missing:
        raise ValueError(f"initial message {missing[0]} does not occur in the traces")
    return grow_graph(alphabet, cfg.initial, cfg.terminal, strict=strict)


def drop_unreachable(g: CausalityGraph) -> CausalityGraph:
    succ = g.successors()
    seen = set(g.roots & g.nodes)
    stack = list(seen)
    while stack:
        n = stack.pop()
        for m in succ.get(n, ()):
            if m not in seen:
                seen.add(m)
                stack.append(m)
    edges = {e: info for e, info in g.edges.items() if e[0] in seen and e[1] in seen}
    return CausalityGraph(seen, edges, g.roots & seen, g.terminals & seen)


def prune_invalid_edges(g: CausalityGraph, bp_i: Iterable[Rel]) -> CausalityGraph:
    bad = set(bp_i)
    if not bad & g.edges.keys():
        return g.copy()
    out = g.copy()
    out.edges = {e: info for e, info in g.edges.items() if e not in bad}
    return drop_unreachable(out)


def annotate_confidences(g: CausalityGraph, traces: Sequence[Trace], local: LocalMiningResult) -> CausalityGraph:
    """Attach confidences, valid-pattern support and mean gap to every edge.

    Valid-pattern edges reuse the local scores and matched instances; other
    edges are scored on the whole trace.  Edges with no pair in any trace are
    dropped.
    """
    n_traces = len(traces)
    local_pairs: dict[Rel, list] = defaultdict(list)
    for mi in local.matches:
        local_pairs[mi.pattern].append(mi.pairs)
    need = [e for e in g.edges if e not in local.valid]
    global_pairs: dict[Rel, list] = defaultdict(list)
    scores: dict[Rel, list[float]] = {}
    if need:
        wanted = {m for e in need for m in e}
        for t in traces:
            by_type: dict[Message, list[int]] = defaultdict(list)
            for pos, m in enumerate(t.messages):
                if m in wanted:
                    by_type[m].append(pos)
            for a, b in need:
                if a not in by_type or b not in by_type:
                    continue
                pairs = fifo_pairs(by_type[a], by_type[b])
                if not pairs:
                    continue
                acc = scores.setdefault((a, b), [0.0, 0.0, 0])
                acc[0] += len(pairs) / len(by_type[a])
                acc[1] += len(pairs) / len(by_type[b])
                acc[2] += 1
                global_pairs[(a, b)].append(pairs)
    edges = {}
    for e in g.edges:
        if e in local.valid:
            bp = local.valid[e]
            runs = local_pairs.get(e, [])
            support = sum(len(p) for p in runs) / n_traces
            edges[e] = EdgeInfo(bp.fc, bp.bc, True, support, _mean_gap(runs))
        elif e in scores:
            fc, bc, n = scores[e]
            edges[e] = EdgeInfo(fc / n, bc / n, False, 0.0, _mean_gap(global_pairs[e]))
    out = CausalityGraph(set(g.nodes), edges, g.roots, g.terminals)
    return drop_unreachable(out)


def _mean_gap(runs: list) -> float:
    """Mean gap per trace, then averaged over traces."""
    per_trace = [sum(d - s for s, d in pairs) / len(pairs) for pairs in runs if pairs]
    return sum(per_trace) / len(per_trace) if per_trace else 0.0


def enumerate_paths(g: CausalityGraph, cap: int = DEFAULT_PATH_CAP) -> list[tuple[Message, ...]]:
    """All root-to-terminal paths by depth-first search, in deterministic order."""
    succ = g.successors()
    out: list[tuple[Message, ...]] = []
    for r in sorted(g.roots):
        if r in g.terminals:
            continue
        stack = [(r, (r,))]
        while stack:
            n, path = stack.pop()
            for m in reversed(succ.get(n, ())):
                p = path + (m,)
                if m in g.terminals:
                    out.append(p)
                    if len(out) > cap:
                        raise PathLimitExceeded(
                            f"more than {cap} candidate paths; raise the path cap or narrow the role config")
                elif m not in path:
                    stack.append((m, p))
    return out


def energy_terms(confs: Sequence[float], vbp_total: float, n_msgs: int, gaps: Sequence[float]) -> tuple[float, float, float]:
    """The three energy terms: confidence cost, valid-pattern support cost,
    mean distance.  Logarithms are base 2."""
    k = len(confs)
    if k == 0:
        raise ValueError("path has no edges")
    share = vbp_total / n_msgs
    if share <= 0:  # also catches underflow of tiny supports
        return (math.inf, math.inf, math.inf)
    t1 = sum(-math.log2(c) if c > 0 else math.inf for c in confs) / k
    t2 = -math.log2(share)
    t3 = sum(gaps) / k
    return (t1, t2, t3)


def energy(confs: Sequence[float], vbp_total: float, n_msgs: int, gaps: Sequence[float]) -> float:
    t1, t2, t3 = energy_terms(confs, vbp_total, n_msgs, gaps)
    return t1 + t2 + t3


def path_energy(msgs: Sequence[Message], g: CausalityGraph) -> float:
    infos = [g.edges[e] for e in zip(msgs, msgs[1:])]
    return energy(
        [i.conf for i in infos],
        sum(i.support for i in infos if i.valid),
        len(msgs),
        [i.gap for i in infos],
    )


def global_mine(
    traces: Sequence[Trace],
    local: LocalMiningResult,
    cfg: MessageRoleConfig,
    path_cap: int = DEFAULT_PATH_CAP,
    strict: bool = True,
) -> RankedPathPool:
    g = build_causality_graph(traces, cfg, strict)
    g = prune_invalid_edges(g, local.invalid)
    g = annotate_confidences(g, traces, local)
    paths = [CandidatePath(p, path_energy(p, g)) for p in enumerate_paths(g, path_cap)]
    return RankedPathPool(paths, g)


def graph_to_dot(g: CausalityGraph, name: str = "causality") -> str:
    ids = {m: f"n{i}" for i, m in enumerate(sorted(g.nodes))}
    lines = [f"digraph {name} {{", "  rankdir=TB;"]
    for m, nid in ids.items():
        shape = "doublecircle" if m in g.terminals else ("box" if m in g.roots else "ellipse")
        lines.append(f'  {nid} [label="{m}", shape={shape}];')
    for (a, b) in sorted(g.edges):
        info = g.edges[(a, b)]
        style = "solid" if info.valid else "dashed"
        lines.append(f'  {ids[a]} -> {ids[b]} [label="{info.fc:.2f}/{info.bc:.2f}", style={style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
