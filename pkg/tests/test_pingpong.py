import pytest

from tca import RunOutcome, Runtime
from tca.pingpong import pingpong

from .conftest import SCENARIOS, live_children, read_transcript, wait_until
from tca.simulator import stub_command

TOOL1_ONE_ROUND = """mode script
start send snd-event(message)
on ^snd-ack-event\\(message\\)$ send snd-event(quit)
on ^quit$ exit
"""
TOOL2_ONE_EVAL = "mode script\non ^snd-eval\\(message\\)$ send snd-value(ack)\n"


def test_one_round_wire_traces(rt, make_stub):
    t1, tr1 = make_stub(TOOL1_ONE_ROUND, transcript=True)
    t2, tr2 = make_stub(TOOL2_ONE_EVAL, transcript=True)
    result = pingpong(t1, t2, rt)
    assert result.outcome is RunOutcome.SHUTDOWN
    assert read_transcript(tr1) == [
        "args",
        "out snd-event(message)",
        "in snd-ack-event(message)",
        "out snd-event(quit)",
        "in quit",
        "exit 0",
    ]
    assert read_transcript(tr2) == [
        "args",
        "in snd-eval(message)",
        "out snd-value(ack)",
        "end-of-script",
        "exit 0",
    ]


def test_immediate_quit_kills_tool2_without_traffic(sink, rt, make_stub):
    rt.set_debug(True)
    t1 = make_stub("mode script\nstart send snd-event(quit)\non ^quit$ exit\n")
    t2, tr2 = make_stub("mode script\n", transcript=True)
    assert pingpong(t1, t2, rt).outcome is RunOutcome.SHUTDOWN
    assert read_transcript(tr2) == ["args", "end-of-script", "exit 0"]
    assert "TCA tool comp2 killed" in sink.lines
    assert wait_until(lambda: not live_children())


def test_debug_off_trace_empty(sink, rt):
    d = SCENARIOS / "pingpong"
    result = pingpong(stub_command(d / "tool1.tca"), stub_command(d / "tool2.tca"), rt)
    assert result.outcome is RunOutcome.SHUTDOWN
    assert sink.lines == []


def test_tool_eof_before_quit_aborts(rt, make_stub):
    t1 = make_stub("mode script\nstart send snd-event(message)\non ^snd-ack-event\\(message\\)$ exit\n")
    t2 = make_stub("mode reactive\non ^snd-eval\\((.*)\\)$ send snd-value(ack)\n")
    result = pingpong(t1, t2, rt)
    assert result.outcome is RunOutcome.FAILED
    assert result.errors[0][0] == "comp1"
    assert wait_until(lambda: not live_children())


def test_wrong_coordinator_is_detected(make_stub):
    """Fault injection: a coordinator acking with a fixed term breaks tool1's script."""
    from tca.terms import EXPR

    rt = Runtime(kill_grace=2.0)
    t1, tr1 = make_stub(TOOL1_ONE_ROUND, transcript=True)

    def bad_comp1():
        tool = rt.tool("comp1", t1[0], *t1[1:])
        tool.start()
        line = tool.receive()
        assert EXPR.match("rec-event", line) == ["message"]
        tool.send("snd-ack-event(ack)")
        tool._proc.wait(5)
        rt.shutdown()

    rt.run(bad_comp1)
    lines = read_transcript(tr1)
    assert lines[-1] == "exit 2"
    assert any(ln.startswith("violation expected") for ln in lines)
