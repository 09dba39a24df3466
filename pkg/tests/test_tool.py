import threading
import time

import pytest

from tca import (
    MuxOutcome,
    ShutdownInterrupt,
    ToolBrokenPipe,
    ToolEOF,
    ToolSpawnError,
    ToolState,
    ToolStateError,
)

from .conftest import PY, pid_exists, read_transcript, spawn, wait_until

HELLO = "mode script\nstart send snd-event(hello)\n"
ECHO = "mode reactive\non ^snd-eval\\((.+)\\)$ send snd-value($1)\n"


def test_new_tool_is_created_and_registered(rt):
    a = rt.tool("comp1", "/usr/bin/wish", "tool1adapter.tcl")
    b = rt.tool("comp1", "/usr/bin/wish", "tool1adapter.tcl")
    assert a.state is ToolState.CREATED and b.state is ToolState.CREATED
    assert a in rt.registry and b in rt.registry and len(rt.registry) == 2
    assert a.args == ["tool1adapter.tcl"]


def test_start_and_receive(rt, make_stub):
    cmd = make_stub(HELLO)
    t = rt.tool("stub", *cmd)
    t.start()
    assert t.state is ToolState.RUNNING
    assert t.receive() == "snd-event(hello)"


def test_start_missing_executable(rt):
    t = rt.tool("ghost", "/nonexistent/tool")
    with pytest.raises(ToolSpawnError, match="ghost"):
        t.start()
    assert t.state is ToolState.EXITED
    assert t not in rt.registry


def test_double_start(rt, make_stub):
    t = rt.tool("stub", *make_stub(HELLO))
    t.start()
    with pytest.raises(ToolStateError):
        t.start()


def test_send_reaches_child_stdin(rt, make_stub):
    cmd, transcript = make_stub("mode reactive\n", transcript=True)
    t = rt.tool("comp1", *cmd)
    t.start()
    t.send("snd-ack-event(ack)")
    t.send("second")
    t.kill()
    assert read_transcript(transcript)[1:3] == ["in snd-ack-event(ack)", "in second"]


def test_send_and_receive_trace(sink, rt, make_stub):
    rt.set_debug(True)
    t = rt.tool("comp2", *make_stub(ECHO))
    t.start()
    t.send("snd-eval(quit)")
    assert t.receive() == "snd-value(quit)"
    t.kill()
    assert sink.lines == [
        "TCA comp2 send: snd-eval(quit)",
        "TCA comp2 receive: snd-value(quit)",
        "TCA tool comp2 killed",
    ]


def test_send_after_kill(rt, make_stub):
    t = rt.tool("stub", *make_stub(ECHO))
    t.start()
    t.kill()
    with pytest.raises(ToolStateError):
        t.send("quit")
    with pytest.raises(ToolStateError):
        t.receive()


def test_receive_lines_in_order(rt, make_stub):
    lines = [f"snd-event(e{i})" for i in range(200)]
    scenario = "mode script\nstart " + "\n".join(f"send {ln}" for ln in lines) + "\n"
    t = rt.tool("flood", *make_stub(scenario))
    t.start()
    assert [t.receive() for _ in lines] == lines


def test_eof_is_terminal_and_repeatable(rt):
    t = rt.tool("quiet", PY, "-c", "pass")
    t.start()
    with pytest.raises(ToolEOF):
        t.receive()
    with pytest.raises(ToolEOF):
        t.receive()


def test_eof_through_mux(rt):
    t = rt.tool("quiet", PY, "-c", "print('snd-event(x)')")
    t.start()
    mux = rt.mux()
    got = []
    mux.add(t.source(), got.append, on_eof=mux.stop)
    assert mux.run() is MuxOutcome.STOPPED
    assert got == ["snd-event(x)"]


def test_truncated_last_line_is_dropped(rt, caplog):
    t = rt.tool("partial", PY, "-c", "import sys; sys.stdout.write('a\\nbc')")
    t.start()
    assert t.receive() == "a"
    with pytest.raises(ToolEOF):
        t.receive()
    assert "truncated" in caplog.text


def test_broken_pipe_marks_exited(rt):
    t = rt.tool("dead", PY, "-c", "import sys; sys.stdin.close()")
    t.start()
    t._proc.wait()
    with pytest.raises(ToolBrokenPipe):
        for _ in range(100):
            t.send("x" * 1000)
    assert t.state is ToolState.EXITED
    assert t not in rt.registry


def test_kill_running_stub(sink, rt, make_stub):
    rt.set_debug(True)
    t = rt.tool("comp2", *make_stub("mode reactive\n"))
    t.start()
    pid = t.pid
    assert pid_exists(pid)
    t.kill()
    assert not pid_exists(pid)
    assert t.state is ToolState.KILLED and t not in rt.registry
    t.kill()
    assert sink.lines == ["TCA tool comp2 killed"]


def test_kill_is_forceful_after_grace(rt):
    # ignores stdin EOF and SIGTERM: only SIGKILL ends it
    code = "import signal, time; signal.signal(signal.SIGTERM, signal.SIG_IGN); time.sleep(60)"
    t = rt.tool("stubborn", PY, "-c", code)
    t.start()
    t0 = time.monotonic()
    t.kill(grace=0.2)
    assert time.monotonic() - t0 < 2.0
    assert not pid_exists(t.pid)
    assert t.returncode == -9


def test_kill_created_tool(rt):
    t = rt.tool("never", "/bin/true")
    t.kill()
    assert t.state is ToolState.KILLED and t not in rt.registry
    with pytest.raises(ToolStateError):
        t.start()


def test_shutdown_interrupts_blocked_receive(rt, make_stub):
    t = rt.tool("idle", *make_stub("mode reactive\n"))
    t.start()
    caught = []

    def recv():
        try:
            t.receive()
        except ShutdownInterrupt:
            caught.append(True)

    th = spawn(recv)
    time.sleep(0.05)
    rt.shutdown()
    th.join(2)
    assert caught == [True]
    assert not pid_exists(t.pid)


def test_backpressure_reader_holds_one_line(rt, make_stub):
    scenario = "mode script\nstart " + "\n".join(f"send snd-event({i})" for i in range(5)) + "\n"
    t = rt.tool("bp", *make_stub(scenario))
    t.start()
    assert wait_until(lambda: t._slot is not None)
    time.sleep(0.05)
    assert t._slot == "snd-event(0)"
    assert [t.receive() for _ in range(5)] == [f"snd-event({i})" for i in range(5)]


def test_stderr_passes_through(rt, capfd):
    t = rt.tool("noisy", PY, "-c", "import sys; sys.stderr.write('diag\\n')")
    t.start()
    with pytest.raises(ToolEOF):
        t.receive()
    t.kill()
    assert "diag" in capfd.readouterr().err


def test_concurrent_kills_trace_once(sink, rt, make_stub):
    rt.set_debug(True)
    t = rt.tool("racy", *make_stub("mode reactive\n"))
    t.start()
    ts = [threading.Thread(target=t.kill) for _ in range(8)]
    for th in ts:
        th.start()
    for th in ts:
        th.join()
    assert sink.lines == ["TCA tool racy killed"]
