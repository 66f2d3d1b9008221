import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from flowmine.synth import CPU_READ_MSGS, numbered  # noqa: E402
from flowmine.trace import MessageRoleConfig, Trace  # noqa: E402

M = CPU_READ_MSGS
# The two worked traces over the six CPU-read messages.
TRACE_1 = (3, 1, 1, 5, 4, 6, 2, 5, 6, 2, 1, 2, 3, 4)
TRACE_4 = (1, 3, 5, 2, 6, 4, 1, 5, 6, 2, 3, 4)
READ_PATHS = ((1, 2), (1, 5, 6, 2), (3, 4), (3, 5, 6, 4))


def as_trace(seq, id="t"):
    return Trace(tuple(numbered(seq)), id)


def as_numbers(msgs):
    inv = {m: k for k, m in M.items()}
    return tuple(inv[m] for m in msgs)


@pytest.fixture
def read_roles():
    return MessageRoleConfig({M[1], M[3]}, {M[2], M[4]})


@pytest.fixture
def trace4():
    return as_trace(TRACE_4, "trace4")


@pytest.fixture
def trace1():
    return as_trace(TRACE_1, "trace1")


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[n])
