"""Process lifecycle: run, shutdown, the tool registry and debug tracing."""

from __future__ import annotations

import enum
import logging
import threading
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import TextIO

from .channel import Channel
from .errors import ShutdownInterrupt
from .mux import Mux
from .tool import Tool, kill_all
from .trace import TraceEvent, TraceSink

log = logging.getLogger(__name__)

ProcessFunction = Callable[[], object]


class RunOutcome(enum.Enum):
    COMPLETED = "completed"
    SHUTDOWN = "shutdown"
    FAILED = "failed"


@dataclass
class RunResult:
    outcome: RunOutcome
    errors: list[tuple[str, BaseException]] = field(default_factory=list)

    @property
    def exit_status(self) -> int:
        return 1 if self.outcome is RunOutcome.FAILED else 0


class ToolRegistry:
    """Live tool handles, in registration order."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._tools: dict[int, Tool] = {}

    def add(self, tool: Tool) -> None:
        with self._lock:
            self._tools[id(tool)] = tool

    def discard(self, tool: Tool) -> None:
        with self._lock:
            self._tools.pop(id(tool), None)

    def snapshot(self) -> list[Tool]:
        with self._lock:
            return list(self._tools.values())

    def __len__(self) -> int:
        with self._lock:
            return len(self._tools)

    def __contains__(self, tool: object) -> bool:
        with self._lock:
            return id(tool) in self._tools


class Runtime:
    """Owns the shared condition that every channel, tool and mux waits on.

    One condition for the whole runtime makes multi-source waits and
    shutdown wake-ups trivially race-free. :meth:`shutdown` kills every
    registered tool and makes all blocked operations raise
    :class:`ShutdownInterrupt`; called from a process it does not return.
    """

    def __init__(
        self,
        debug: bool = False,
        trace: TraceSink | TextIO | None = None,
        kill_grace: float = 0.5,
        join_grace: float = 5.0,
    ):
        self.cond = threading.Condition()
        self.registry = ToolRegistry()
        self.kill_grace = kill_grace
        self.join_grace = join_grace
        self._debug = debug
        self.sink = trace if isinstance(trace, TraceSink) else TraceSink(trace)
        self._shut_down = False
        self._cleanup_lock = threading.Lock()
        self._cleaned = threading.Event()
        self._threads: list[threading.Thread] = []
        self._errors: list[tuple[str, BaseException]] = []
        self._ran = False

    # -- debug -------------------------------------------------------------

    @property
    def debug(self) -> bool:
        return self._debug

    def set_debug(self, flag: bool) -> None:
        self._debug = bool(flag)

    def emit(self, event: TraceEvent) -> None:
        if self._debug:
            self.sink.write_line(event.render())

    # -- factories ---------------------------------------------------------

    def channel(self, id: str) -> Channel:
        return Channel(id, self)

    def tool(self, id: str, command: str, *args: str) -> Tool:
        return Tool(id, command, args, self)

    def mux(self) -> Mux:
        return Mux(self)

    # -- shutdown ----------------------------------------------------------

    @property
    def shut_down(self) -> bool:
        return self._shut_down

    def check_running(self) -> None:
        if self._shut_down:
            raise ShutdownInterrupt("runtime has shut down")

    def _terminate(self) -> None:
        with self.cond:
            already = self._shut_down
            self._shut_down = True
            self.cond.notify_all()
        if already:
            self._cleaned.wait()
            return
        with self._cleanup_lock:
            try:
                kill_all(self.registry.snapshot(), self.kill_grace)
            finally:
                self._cleaned.set()

    def shutdown(self) -> None:
        """Kill all registered tools and interrupt every process.

        Safe to call concurrently and repeatedly; only the first call does
        the cleanup. Inside a running process this raises
        :class:`ShutdownInterrupt` so the caller unwinds like every other
        process does.
        """
        self._terminate()
        if threading.current_thread() in self._threads:
            raise ShutdownInterrupt("shutdown")

    # -- run -----------------------------------------------------------------

    def _wrap(self, proc: ProcessFunction) -> Callable[[], None]:
        name = getattr(proc, "__name__", repr(proc))

        def body() -> None:
            try:
                proc()
            except ShutdownInterrupt:
                pass
            except BaseException as exc:
                log.error("process %s failed: %s", name, exc, exc_info=exc)
                with self.cond:
                    self._errors.append((name, exc))
                self._terminate()
            finally:
                with self.cond:
                    self.cond.notify_all()

        return body

    def run(self, *procs: ProcessFunction) -> RunResult:
        """Start every process function concurrently and wait.

        Returns when all have returned (COMPLETED) or when shutdown was
        invoked (SHUTDOWN). A process raising anything else aborts the run
        after killing all tools (FAILED).
        """
        if self._ran:
            raise RuntimeError("a runtime can only run once")
        if not procs:
            raise ValueError("run needs at least one process function")
        self._ran = True
        for i, proc in enumerate(procs):
            name = getattr(proc, "__name__", f"proc{i}")
            t = threading.Thread(target=self._wrap(proc), name=f"tca-{name}", daemon=True)
            self._threads.append(t)
        for t in self._threads:
            t.start()
        with self.cond:
            while not self._shut_down and any(t.is_alive() for t in self._threads):
                self.cond.wait(timeout=0.5)
        if self._shut_down:
            self._cleaned.wait()
            deadline = time.monotonic() + self.join_grace
            for t in self._threads:
                t.join(timeout=max(0.0, deadline - time.monotonic()))
                if t.is_alive():
                    log.warning("process thread %s did not finish after shutdown", t.name)
        with self.cond:
            errors = list(self._errors)
        if errors:
            return RunResult(RunOutcome.FAILED, errors)
        if self._shut_down:
            return RunResult(RunOutcome.SHUTDOWN)
        return RunResult(RunOutcome.COMPLETED)
