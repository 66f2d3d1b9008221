"""Mining message flows from interleaved SoC execution traces.

The pipeline slices a trace by interface, mines binary message patterns per
slice, ranks root-to-terminal paths of the causality graph by an energy
score and accepts flow instances in a single position-aware pass.
"""
from .evaluation import AcceptanceReport, FlowModel, evaluate
from .graph import CausalityGraph, RankedPathPool, global_mine
from .local import BinaryPattern, LocalMiningResult, local_mine
from .pipeline import ABLATIONS, MiningRun, mine
from .synth import FlowSpec, GroundTruth, builtin_flows, generate, roles_for
from .trace import Message, MessageRoleConfig, Trace, parse_trace, read_trace, slice_trace

__all__ = [
    "ABLATIONS",
    "AcceptanceReport",
    "BinaryPattern",
    "CausalityGraph",
    "FlowModel",
    "FlowSpec",
    "GroundTruth",
    "LocalMiningResult",
    "Message",
    "MessageRoleConfig",
    "MiningRun",
    "RankedPathPool",
    "Trace",
    "builtin_flows",
    "evaluate",
    "generate",
    "global_mine",
    "local_mine",
    "mine",
    "parse_trace",
    "read_trace",
    "roles_for",
    "slice_trace",
]
