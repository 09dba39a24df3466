from __future__ import annotations

import os
import sys
import threading
import time
from pathlib import Path

import psutil
import pytest

from tca import ListSink, Runtime
from tca.simulator import stub_command

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "tca" / "scenarios"


@pytest.fixture
def sink():
    return ListSink()


@pytest.fixture
def rt(sink):
    runtime = Runtime(debug=False, trace=sink, kill_grace=0.5)
    yield runtime
    runtime.shutdown()


@pytest.fixture
def make_stub(tmp_path):
    """Write a scenario and return the command line for a stub running it."""
    counter = iter(range(10_000))

    def factory(text: str, *args: str, transcript: bool = False):
        n = next(counter)
        path = tmp_path / f"stub{n}.tca"
        path.write_text(text)
        t = tmp_path / f"stub{n}.txt" if transcript else None
        cmd = stub_command(path, t) + list(args)
        return (cmd, t) if transcript else cmd

    return factory


def pid_exists(pid: int) -> bool:
    """True while the pid is alive or an unreaped zombie."""
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    return True


def wait_until(pred, timeout: float = 2.0, interval: float = 0.01) -> bool:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if pred():
            return True
        time.sleep(interval)
    return pred()


def live_children() -> list[psutil.Process]:
    return [p for p in psutil.Process().children(recursive=True) if p.is_running()]


def spawn(target, *args) -> threading.Thread:
    t = threading.Thread(target=target, args=args, daemon=True)
    t.start()
    return t


def read_transcript(path: Path) -> list[str]:
    return path.read_text().splitlines()


PY = sys.executable


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
