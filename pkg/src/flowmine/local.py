"""Local mining: binary patterns per interface slice.

For every slice we collect the causal message pairs, score them with forward
and backward confidence, keep a minimal high-confidence cover as the valid
patterns and record, for each valid pattern, which source occurrence pairs
with which destination occurrence (in original trace positions).

Pair counting is FIFO one-to-one: each destination occurrence consumes the
earliest still-unconsumed source occurrence before it.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .trace import InterfaceId, InterfaceSlice, Message, Trace, causal, slice_trace

log = logging.getLogger(__name__)

Rel = tuple[Message, Message]


@dataclass(frozen=True)
class BinaryPattern:
    src_msg: Message
    dst_msg: Message
    fc: float
    bc: float
    freq: int = 0
    valid: bool = False
    scope: str = "interface"

    @property
    def key(self) -> Rel:
        return (self.src_msg, self.dst_msg)

    @property
    def conf(self) -> float:
        return (self.fc + self.bc) / 2


@dataclass(frozen=True)
class MatchedInstances:
    pattern: Rel
    pairs: tuple[tuple[int, int], ...]
    trace_index: int = 0

    def mean_gap(self) -> float:
        return sum(d - s for s, d in self.pairs) / len(self.pairs)


@dataclass
class LocalMiningResult:
    valid: dict[Rel, BinaryPattern] = field(default_factory=dict)
    invalid: dict[Rel, BinaryPattern] = field(default_factory=dict)
    matches: list[MatchedInstances] = field(default_factory=list)
    uncovered: dict[InterfaceId, frozenset[Message]] = field(default_factory=dict)
    slicing: bool = True

    @property
    def valid_patterns(self) -> set[Rel]:
        return set(self.valid)

    @property
    def invalid_patterns(self) -> set[Rel]:
        return set(self.invalid)

    def matches_for(self, trace_index: int) -> dict[Rel, MatchedInstances]:
        return {mi.pattern: mi for mi in self.matches if mi.trace_index == trace_index}

    def to_json(self) -> dict:
        def row(bp):
            return {"src": str(bp.src_msg), "dst": str(bp.dst_msg), "fc": bp.fc, "bc": bp.bc,
                    "freq": bp.freq, "scope": bp.scope}

        return {
            "valid": [row(self.valid[k]) for k in sorted(self.valid)],
            "invalid": [row(self.invalid[k]) for k in sorted(self.invalid)],
            "uncovered": {str(i): sorted(str(m) for m in ms) for i, ms in sorted(self.uncovered.items())},
        }


def positions_by_type(messages: Sequence[Message], positions: Sequence[int]) -> dict[Message, list[int]]:
    out: dict[Message, list[int]] = defaultdict(list)
    for m, p in zip(messages, positions):
        out[m].append(p)
    return dict(out)


def fifo_pairs(a_pos: Sequence[int], b_pos: Sequence[int]) -> list[tuple[int, int]]:
    """FIFO one-to-one pairing of two sorted position lists.

    Every B consumes the earliest unconsumed A that precedes it.
    """
    pairs = []
    ia = 0
    na = len(a_pos)
    for b in b_pos:
        if ia < na and a_pos[ia] < b:
            pairs.append((a_pos[ia], b))
            ia += 1
    return pairs


def causal_relations(by_type: dict[Message, list[int]], strict: bool = True) -> set[Rel]:
    """Ordered pairs of distinct types that are structurally causal and where
    some A occurs before some B."""
    out = set()
    for a, a_pos in by_type.items():
        first_a = a_pos[0]
        for b, b_pos in by_type.items():
            if a != b and causal(a, b, strict) and first_a < b_pos[-1]:
                out.add((a, b))
    return out


def extract_causal_relations(s: InterfaceSlice, strict: bool = True) -> set[Rel]:
    return causal_relations(positions_by_type(s.messages, s.positions), strict)


def score(s: InterfaceSlice, rel: Rel) -> tuple[float, float]:
    """(fc, bc) of ``rel`` on a slice."""
    by_type = positions_by_type(s.messages, s.positions)
    a, b = rel
    f = len(fifo_pairs(by_type.get(a, []), by_type.get(b, [])))
    return f / len(by_type[a]), f / len(by_type[b])


def match_instances(s: InterfaceSlice, p: BinaryPattern | Rel, trace_index: int = 0) -> MatchedInstances:
    key = p.key if isinstance(p, BinaryPattern) else p
    by_type = positions_by_type(s.messages, s.positions)
    pairs = fifo_pairs(by_type.get(key[0], []), by_type.get(key[1], []))
    return MatchedInstances(key, tuple(pairs), trace_index)


def greedy_cover(types: Iterable[Message], scored: Iterable[BinaryPattern]) -> tuple[list[BinaryPattern], list[BinaryPattern], set[Message]]:
    """Greedy weighted set cover of message types by binary patterns.

    Candidates go by fc+bc descending, then pair count, then (A, B).  A
    candidate is taken iff it covers a type that is still uncovered.
    Returns (selected, rejected, uncoverable types).
    """
    todo = set(types)
    ranked = sorted(scored, key=lambda bp: (-(bp.fc + bp.bc), -bp.freq, bp.key))
    coverable = set()
    for bp in ranked:
        coverable.update(bp.key)
    uncoverable = todo - coverable
    todo &= coverable
    chosen, rest = [], []
    for bp in ranked:
        if todo and (bp.src_msg in todo or bp.dst_msg in todo):
            chosen.append(bp)
            todo.discard(bp.src_msg)
            todo.discard(bp.dst_msg)
        else:
            rest.append(bp)
    return chosen, rest, uncoverable


def select_valid_patterns(s: InterfaceSlice, scored: Iterable[BinaryPattern]) -> tuple[set[Rel], set[Rel]]:
    chosen, rest, _ = greedy_cover(set(s.messages), scored)
    return {bp.key for bp in chosen}, {bp.key for bp in rest}


def _mine_segments(
    segments: dict[object, list[tuple[int, dict[Message, list[int]]]]],
    scope: str,
    select: bool,
    strict: bool,
) -> LocalMiningResult:
    """Shared core: ``segments`` maps a segment key (interface, or None for
    the whole trace) to per-trace position indexes."""
    result = LocalMiningResult(slicing=(scope == "interface"))
    for key in sorted(segments, key=lambda k: (k is None, k)):
        per_trace = segments[key]
        sums: dict[Rel, list[float]] = {}
        pairs_by_rel: dict[Rel, list[tuple[int, list[tuple[int, int]]]]] = defaultdict(list)
        types: set[Message] = set()
        for tidx, by_type in per_trace:
            types.update(by_type)
            for rel in causal_relations(by_type, strict):
                a, b = rel
                pairs = fifo_pairs(by_type[a], by_type[b])
                acc = sums.setdefault(rel, [0.0, 0.0, 0, 0])
                acc[0] += len(pairs) / len(by_type[a])
                acc[1] += len(pairs) / len(by_type[b])
                acc[2] += len(pairs)
                acc[3] += 1
                pairs_by_rel[rel].append((tidx, pairs))
        scored = [
            BinaryPattern(a, b, fc / n, bc / n, freq, False, scope)
            for (a, b), (fc, bc, freq, n) in sums.items()
        ]
        if select:
            chosen, rest, uncov = greedy_cover(types, scored)
            if uncov:
                log.warning("interface %s: %d message type(s) not covered by any pattern", key, len(uncov))
                result.uncovered[key] = frozenset(uncov)
        else:
            chosen, rest = scored, []
        for bp in chosen:
            bp = BinaryPattern(bp.src_msg, bp.dst_msg, bp.fc, bp.bc, bp.freq, True, scope)
            result.valid[bp.key] = bp
            for tidx, pairs in pairs_by_rel[bp.key]:
                if pairs:
                    result.matches.append(MatchedInstances(bp.key, tuple(pairs), tidx))
        for bp in rest:
            result.invalid[bp.key] = bp
    result.matches.sort(key=lambda mi: (mi.trace_index, mi.pattern))
    return result


def local_mine(traces: Sequence[Trace], slicing: bool = True, strict: bool = True) -> LocalMiningResult:
    """Mine valid/invalid binary patterns and their matched instances.

    With ``slicing=False`` every causal relation is scored on the whole trace
    and treated as valid (the no-slicing ablation).
    """
    if not traces:
        raise ValueError("no traces")
    segments: dict[object, list] = defaultdict(list)
    for tidx, t in enumerate(traces):
        if not len(t):
            raise ValueError("empty trace")
        if slicing:
            for iface, s in slice_trace(t).items():
                segments[iface].append((tidx, positions_by_type(s.messages, s.positions)))
        else:
            segments[None].append((tidx, positions_by_type(t.messages, range(len(t)))))
    if slicing:
        return _mine_segments(segments, "interface", True, strict)
    return _mine_segments(segments, "global", False, strict)
