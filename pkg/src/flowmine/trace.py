"""Messages, traces, interface identity and interface slicing.

A trace is stored as a tuple of :class:`Message` objects; the position of an
event is its index in that tuple.  :class:`TraceEvent` views are built on
demand, the mining code works on positions directly.
"""
from __future__ import annotations

import re
from collections import namedtuple
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator

KINDS = ("req", "resp")

_MSG_RE = re.compile(r"^\(?\s*([^:()\s]+):([^:()\s]+):([^:()\s]+):([^:()\s]+)\s*\)?$")
_LINE_RE = re.compile(r"^(?:(\d+)\s+)?(\(.*\))$")


class TraceParseError(ValueError):
    """Raised for malformed trace files; carries the offending line number."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class Message(namedtuple("_Message", "src dest cmd kind")):
    """One message type ``(src:dest:cmd:kind)``.

    A validated named tuple: messages are hashed and compared constantly
    during mining, and tuple hashing runs in C.  Ordering is field order.
    """

    __slots__ = ()

    def __new__(cls, src: str, dest: str, cmd: str, kind: str):
        for name, value in (("src", src), ("dest", dest), ("cmd", cmd), ("kind", kind)):
            if not value:
                raise ValueError(f"message field {name!r} is empty")
        if kind not in KINDS:
            raise ValueError(f"message kind must be one of {KINDS}, got {kind!r}")
        return super().__new__(cls, src, dest, cmd, kind)

    @classmethod
    def parse(cls, text: str) -> "Message":
        """Parse ``src:dest:cmd:kind`` with or without surrounding parentheses."""
        m = _MSG_RE.match(text.strip())
        if m is None:
            raise ValueError(f"not a message quadruple: {text!r}")
        return cls(*m.groups())

    @property
    def is_request(self) -> bool:
        return self.kind == "req"

    @property
    def interface(self) -> "InterfaceId":
        return interface_of(self)

    def __str__(self) -> str:
        return f"({self.src}:{self.dest}:{self.cmd}:{self.kind})"


def causal(a: Message, b: Message, strict: bool = True) -> bool:
    """Structural causality: ``b`` can be caused by ``a`` when ``a.dest == b.src``.

    With ``strict`` a response never causes a message travelling back over the
    same interface: the response completes its exchange, and whatever comes
    back belongs to another one.
    """
    if a.dest != b.src:
        return False
    if strict and not a.is_request and b.dest == a.src:
        return False
    return True


@dataclass(frozen=True, order=True, slots=True)
class InterfaceId:
    """Unordered pair of component names, stored sorted."""

    endpoints: tuple[str, str]

    @classmethod
    def of(cls, a: str, b: str) -> "InterfaceId":
        return cls((a, b) if a <= b else (b, a))

    def __contains__(self, component: str) -> bool:
        return component in self.endpoints

    def __str__(self) -> str:
        return "{%s,%s}" % self.endpoints


def interface_of(m: Message) -> InterfaceId:
    return InterfaceId.of(m.src, m.dest)


@dataclass(frozen=True, slots=True)
class TraceEvent:
    msg: Message
    pos: int


@dataclass(frozen=True)
class Trace:
    messages: tuple[Message, ...]
    id: str = "trace"

    def __post_init__(self):
        if not isinstance(self.messages, tuple):
            object.__setattr__(self, "messages", tuple(self.messages))

    @classmethod
    def from_messages(cls, messages: Iterable[Message], id: str = "trace") -> "Trace":
        return cls(tuple(messages), id)

    @cached_property
    def events(self) -> list[TraceEvent]:
        return [TraceEvent(m, i) for i, m in enumerate(self.messages)]

    @cached_property
    def alphabet(self) -> frozenset[Message]:
        return frozenset(self.messages)

    def __len__(self) -> int:
        return len(self.messages)

    def __iter__(self) -> Iterator[TraceEvent]:
        return iter(self.events)

    def __getitem__(self, pos: int) -> Message:
        return self.messages[pos]


@dataclass(frozen=True)
class InterfaceSlice:
    interface: InterfaceId
    positions: tuple[int, ...]
    messages: tuple[Message, ...]

    @property
    def events(self) -> list[TraceEvent]:
        return [TraceEvent(m, p) for m, p in zip(self.messages, self.positions)]

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class MessageRoleConfig:
    initial: frozenset[Message]
    terminal: frozenset[Message]

    def __post_init__(self):
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "terminal", frozenset(self.terminal))

    def check(self) -> None:
        if not self.initial or not self.terminal:
            raise ValueError("initial and terminal message sets must both be non-empty")

    def to_json(self) -> dict:
        return {
            "initial": [str(m) for m in sorted(self.initial)],
            "terminal": [str(m) for m in sorted(self.terminal)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MessageRoleConfig":
        try:
            cfg = cls(
                frozenset(Message.parse(s) for s in data["initial"]),
                frozenset(Message.parse(s) for s in data["terminal"]),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"role config needs 'initial' and 'terminal' lists: {exc}") from exc
        cfg.check()
        return cfg


def parse_trace(text: str, id: str = "trace") -> Trace:
    """Parse the line-oriented trace format.

    Each message line is ``(src:dest:cmd:req|resp)``, optionally preceded by an
    integer label.  Labels are ignored; positions follow line order.  Blank
    lines and lines starting with ``#`` are skipped.
    """
    msgs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _LINE_RE.match(line)
        if m is None:
            raise TraceParseError(f"malformed message line {raw!r}", lineno)
        try:
            msgs.append(Message.parse(m.group(2)))
        except ValueError as exc:
            raise TraceParseError(str(exc), lineno) from None
    if not msgs:
        raise TraceParseError("empty trace")
    return Trace(tuple(msgs), id)


def render_trace(trace: Trace) -> str:
    return "".join(f"{m}\n" for m in trace.messages)


def read_trace(path: str | Path) -> Trace:
    path = Path(path)
    return parse_trace(path.read_text(encoding="utf-8"), id=path.stem)


def write_trace(trace: Trace, path: str | Path) -> None:
    Path(path).write_text(render_trace(trace), encoding="utf-8")


def slice_trace(trace: Trace) -> dict[InterfaceId, InterfaceSlice]:
    """Partition a trace by interface, keeping original positions.

    A message belongs to the slice whose endpoints are exactly ``{src, dest}``,
    so every event lands in one slice.  Slices are returned in InterfaceId
    order.
    """
    buckets: dict[InterfaceId, tuple[list[int], list[Message]]] = {}
    iface_cache: dict[Message, InterfaceId] = {}
    for pos, m in enumerate(trace.messages):
        iface = iface_cache.get(m)
        if iface is None:
            iface = iface_cache[m] = interface_of(m)
        bucket = buckets.get(iface)
        if bucket is None:
            bucket = buckets[iface] = ([], [])
        bucket[0].append(pos)
        bucket[1].append(m)
    return {
        iface: InterfaceSlice(iface, tuple(buckets[iface][0]), tuple(buckets[iface][1]))
        for iface in sorted(buckets)
    }
