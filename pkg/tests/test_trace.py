import pickle

import pytest

from conftest import M, TRACE_4, as_numbers, as_trace
from flowmine.trace import (
    InterfaceId,
    Message,
    MessageRoleConfig,
    Trace,
    TraceParseError,
    causal,
    parse_trace,
    read_trace,
    render_trace,
    slice_trace,
    write_trace,
)


def test_parse_message_with_and_without_parens():
    assert Message.parse("(cpu0:cache:rd:req)") == Message("cpu0", "cache", "rd", "req")
    assert Message.parse(" cpu0:cache:rd:req ") == Message("cpu0", "cache", "rd", "req")
    assert str(Message("a", "b", "c", "resp")) == "(a:b:c:resp)"


@pytest.mark.parametrize("bad", ["a:b:c", "a:b:c:ack", "(a::c:req)", "a:b:c:req:x", ""])
def test_parse_message_rejects_malformed(bad):
    with pytest.raises(ValueError):
        Message.parse(bad)


def test_message_fields_validated():
    with pytest.raises(ValueError):
        Message("a", "", "c", "req")
    with pytest.raises(ValueError):
        Message("a", "b", "c", "request")


def test_message_pickles_and_hashes_consistently():
    m = Message.parse("a:b:c:req")
    again = pickle.loads(pickle.dumps(m))
    assert again == m and hash(again) == hash(m)
    assert {m: 1}[again] == 1


def test_causal_requires_dest_to_match_src():
    assert causal(M[1], M[5])  # cpu0->cache then cache->mem
    assert causal(M[5], M[6])
    assert causal(M[6], M[2])
    assert not causal(M[1], M[6])


def test_response_never_causes_a_message_back_over_its_interface():
    assert not causal(M[2], M[1])  # cache->cpu0 resp, then cpu0->cache req
    assert not causal(M[6], M[5])
    back_resp = Message("cpu0", "cache", "inv", "resp")
    assert not causal(M[2], back_resp)
    assert causal(M[2], back_resp, strict=False)
    assert causal(M[2], M[1], strict=False)


def test_interface_is_unordered():
    assert InterfaceId.of("b", "a") == InterfaceId.of("a", "b")
    assert M[1].interface == M[2].interface
    assert "cpu0" in M[1].interface
    assert str(InterfaceId.of("x", "a")) == "{a,x}"


def test_parse_trace_skips_comments_and_labels():
    text = "# header\n\n1 (cpu0:cache:rd:req)\n  (cache:cpu0:rd:resp)\n"
    t = parse_trace(text, id="x")
    assert t.messages == (M[1], M[2])
    assert t.id == "x"
    assert [e.pos for e in t] == [0, 1]


def test_parse_trace_reports_line_number():
    with pytest.raises(TraceParseError) as err:
        parse_trace("(cpu0:cache:rd:req)\n\n(cpu0:cache:rd)\n")
    assert err.value.lineno == 3
    assert "line 3" in str(err.value)


def test_empty_trace_is_an_error():
    with pytest.raises(TraceParseError, match="empty trace"):
        parse_trace("# nothing here\n\n")


def test_file_round_trip(tmp_path):
    t = as_trace(TRACE_4)
    p = tmp_path / "t4.txt"
    write_trace(t, p)
    back = read_trace(p)
    assert back.messages == t.messages
    assert back.id == "t4"
    assert render_trace(back) == p.read_text()


def test_slices_of_worked_trace():
    slices = slice_trace(as_trace(TRACE_4))
    got = {iface: as_numbers(s.messages) for iface, s in slices.items()}
    assert got == {
        InterfaceId.of("cpu0", "cache"): (1, 2, 1, 2),
        InterfaceId.of("cpu1", "cache"): (3, 4, 3, 4),
        InterfaceId.of("cache", "mem"): (5, 6, 5, 6),
    }
    assert slices[InterfaceId.of("cache", "mem")].positions == (2, 4, 7, 8)
    assert list(slices) == sorted(slices)


def test_alphabet():
    assert as_trace(TRACE_4).alphabet == frozenset(M.values())


def test_role_config_json_round_trip():
    cfg = MessageRoleConfig({M[1], M[3]}, {M[2], M[4]})
    assert MessageRoleConfig.from_json(cfg.to_json()) == cfg


@pytest.mark.parametrize("data", [{}, {"initial": []}, {"initial": [], "terminal": ["(a:b:c:resp)"]},
                                  {"initial": ["nope"], "terminal": ["(a:b:c:resp)"]}])
def test_role_config_rejects_bad_input(data):
    with pytest.raises(ValueError):
        MessageRoleConfig.from_json(data)


def test_trace_accepts_any_sequence():
    t = Trace([M[1], M[2]])
    assert isinstance(t.messages, tuple) and len(t) == 2 and t[1] == M[2]
