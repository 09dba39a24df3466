import threading
import time
from collections import Counter

import pytest

from tca import HandlerError, MuxError, MuxOutcome, ShutdownInterrupt

from .conftest import spawn


def feeder(ch, message="tick"):
    """Keep a channel perpetually ready until shutdown."""

    def loop():
        try:
            while True:
                ch.send(message)
        except ShutdownInterrupt:
            pass

    return spawn(loop)


def test_stop_from_handler_of_timer_like_source(rt):
    tick = rt.channel("timer")
    feeder(tick)
    mux = rt.mux()
    mux.add(tick.source(), lambda m: mux.stop())
    t0 = time.monotonic()
    assert mux.run() is MuxOutcome.STOPPED
    assert time.monotonic() - t0 < 1.0


def test_empty_mux_runs_until_shutdown(rt):
    mux = rt.mux()
    result = []
    t = spawn(lambda: result.append(mux.run()))
    time.sleep(0.1)
    assert t.is_alive()
    rt.shutdown()
    t.join(1)
    assert result == [MuxOutcome.SHUTDOWN]


def test_two_muxes_one_channel_exactly_once(rt):
    ch = rt.channel("shared")
    got = {"a": [], "b": []}
    muxes = []
    for name in got:
        m = rt.mux()
        m.add(ch.source(), got[name].append)
        muxes.append(m)
    threads = [spawn(m.run) for m in muxes]
    for i in range(500):
        ch.send(str(i))
    time.sleep(0.05)
    rt.shutdown()
    for t in threads:
        t.join(1)
    assert sorted(got["a"] + got["b"], key=int) == [str(i) for i in range(500)]


def test_channel_and_tool_sources_together(rt, make_stub):
    ch = rt.channel("c")
    tool = rt.tool("t", *make_stub("mode script\nstart send snd-event(from-tool)\n"))
    tool.start()
    mux = rt.mux()
    seen = []

    def handle(m):
        seen.append(m)
        if len(seen) == 2:
            mux.stop()

    mux.add(ch.source(), handle)
    mux.add(tool.source(), handle)
    spawn(ch.send, "from-channel")
    assert mux.run() is MuxOutcome.STOPPED
    assert sorted(seen) == ["from-channel", "snd-event(from-tool)"]


def test_add_rules(rt):
    ch, other = rt.channel("c"), rt.channel("d")
    mux = rt.mux()
    mux.add(ch.source(), print)
    with pytest.raises(MuxError):
        mux.add(ch.source(), print)

    errors = []

    def handler(m):
        try:
            mux.add(other.source(), print)
        except MuxError as exc:
            errors.append(exc)
        mux.stop()

    mux = rt.mux()
    mux.add(ch.source(), handler)
    spawn(ch.send, "x")
    assert mux.run() is MuxOutcome.STOPPED
    assert len(errors) == 1


def test_stop_semantics(rt):
    mux = rt.mux()
    mux.stop()
    mux.stop()
    assert mux.run() is MuxOutcome.STOPPED


def test_stop_inside_handler_finishes_current_handler(rt):
    ch = rt.channel("q")
    feeder(ch, "quit")
    mux = rt.mux()
    log = []

    def handler(m):
        mux.stop()
        log.append("after-stop")

    mux.add(ch.source(), handler)
    assert mux.run() is MuxOutcome.STOPPED
    assert log == ["after-stop"]


def test_handler_failure_aborts(rt):
    ch = rt.channel("boom")
    spawn(ch.send, "x")
    mux = rt.mux()
    mux.add(ch.source(), lambda m: 1 / 0)
    with pytest.raises(HandlerError) as info:
        mux.run()
    assert isinstance(info.value.__cause__, ZeroDivisionError)


def test_shutdown_inside_handler(rt):
    ch = rt.channel("s")
    spawn(ch.send, "x")
    mux = rt.mux()

    def handler(m):
        rt.shutdown()
        # only reached when not called from a runtime process
        ch.receive()

    mux.add(ch.source(), handler)
    assert mux.run() is MuxOutcome.SHUTDOWN


def test_no_dispatch_after_shutdown(rt):
    ch = rt.channel("s")
    mux = rt.mux()
    got = []
    mux.add(ch.source(), got.append)
    rt.shutdown()
    assert mux.run() is MuxOutcome.SHUTDOWN
    assert got == []


def run_ready_sources(rt, n_sources, total):
    """Dispatch ``total`` messages from perpetually ready sources."""
    channels = [rt.channel(f"s{i}") for i in range(n_sources)]
    for ch in channels:
        feeder(ch, ch.id)
    counts = Counter()
    active = 0
    max_active = 0
    guard = threading.Lock()
    mux = rt.mux()

    def handler(m):
        nonlocal active, max_active
        with guard:
            active += 1
            max_active = max(max_active, active)
        counts[m] += 1
        if sum(counts.values()) >= total:
            mux.stop()
        with guard:
            active -= 1

    for ch in channels:
        mux.add(ch.source(), handler)
    assert mux.run() is MuxOutcome.STOPPED
    return counts, max_active


def test_starvation_freedom_and_serialization(rt):
    counts, max_active = run_ready_sources(rt, 2, 10_000)
    assert max_active == 1
    assert all(c > 0 for c in counts.values()) and len(counts) == 2
