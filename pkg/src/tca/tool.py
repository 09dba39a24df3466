"""External tools driven over a stdin/stdout pipe pair."""

from __future__ import annotations

import enum
import logging
import subprocess
import threading
import time
from collections.abc import Iterable, Sequence
from typing import TYPE_CHECKING

from .errors import ShutdownInterrupt, ToolBrokenPipe, ToolEOF, ToolSpawnError, ToolStateError
from .mux import EOF, Source
from .terms import frame_encode, iter_frames
from .trace import TraceEvent, TraceKind

if TYPE_CHECKING:
    from .runtime import Runtime

log = logging.getLogger(__name__)


class ToolState(enum.Enum):
    CREATED = "created"
    RUNNING = "running"
    KILLED = "killed"
    EXITED = "exited"


class Tool:
    """One child process speaking newline-framed terms on stdin/stdout.

    A reader thread pumps stdout lines into a one-slot hand-off, so the
    child sees pipe backpressure when the coordinator stops reading.
    Writes happen on the calling thread and are flushed before
    :meth:`send` returns. Standard error is inherited.
    """

    def __init__(self, id: str, command: str, args: Sequence[str], runtime: Runtime):
        self.id = id
        self.command = command
        self.args = list(args)
        self.state = ToolState.CREATED
        self._rt = runtime
        self._proc: subprocess.Popen | None = None
        self._reader: threading.Thread | None = None
        self._slot: str | None = None
        self._eof = False
        self._wlock = threading.Lock()
        self._klock = threading.Lock()
        self._source = ToolSource(self)
        runtime.registry.add(self)

    def __repr__(self) -> str:
        return f"Tool({self.id!r}, {self.state.value})"

    @property
    def pid(self) -> int | None:
        return self._proc.pid if self._proc else None

    @property
    def returncode(self) -> int | None:
        return self._proc.returncode if self._proc else None

    def start(self) -> None:
        self._rt.check_running()
        if self.state is not ToolState.CREATED:
            raise ToolStateError(self.id, f"cannot start in state {self.state.value}")
        try:
            self._proc = subprocess.Popen(
                [self.command, *self.args],
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
        except OSError as exc:
            self.state = ToolState.EXITED
            self._rt.registry.discard(self)
            raise ToolSpawnError(self.id, f"cannot start {self.command!r}: {exc}") from exc
        self.state = ToolState.RUNNING
        self._reader = threading.Thread(
            target=self._pump, name=f"tool-reader-{self.id}", daemon=True
        )
        self._reader.start()

    def _pump(self) -> None:
        cond = self._rt.cond
        try:
            for line in iter_frames(self._proc.stdout):
                if not line:
                    log.debug("tool %s: skipping empty line", self.id)
                    continue
                with cond:
                    while self._slot is not None and self.state is ToolState.RUNNING:
                        cond.wait()
                    if self.state is not ToolState.RUNNING:
                        return
                    self._slot = line
                    cond.notify_all()
        except (OSError, ValueError):
            # stdout closed underneath us by kill
            pass
        finally:
            with cond:
                self._eof = True
                cond.notify_all()

    def send(self, message: str) -> None:
        data = frame_encode(message)
        if self.state is not ToolState.RUNNING:
            raise ToolStateError(self.id, f"cannot send in state {self.state.value}")
        self._rt.check_running()
        with self._wlock:
            try:
                self._proc.stdin.write(data)
                self._proc.stdin.flush()
            except (OSError, ValueError) as exc:
                if self._rt.shut_down:
                    raise ShutdownInterrupt(f"send to tool {self.id!r}") from exc
                if self.state is not ToolState.RUNNING:
                    raise ToolStateError(self.id, "killed during send") from exc
                self._mark_exited()
                raise ToolBrokenPipe(self.id, f"cannot write {message!r}: {exc}") from exc
        self._rt.emit(TraceEvent(TraceKind.TOOL_SEND, self.id, message))

    def receive(self) -> str:
        """Block for the next line from the tool.

        Raises :class:`ToolEOF` (every time) once the tool's stdout is closed.
        """
        cond = self._rt.cond
        with cond:
            while True:
                self._rt.check_running()
                if self.state is not ToolState.RUNNING:
                    raise ToolStateError(self.id, f"cannot receive in state {self.state.value}")
                if self._slot is not None:
                    line = self._take()
                    break
                if self._eof:
                    raise ToolEOF(self.id)
                cond.wait()
        self._rt.emit(TraceEvent(TraceKind.TOOL_RECEIVE, self.id, line))
        return line

    def source(self) -> ToolSource:
        return self._source

    def _take(self) -> str:
        line = self._slot
        self._slot = None
        self._rt.cond.notify_all()
        return line

    def _mark_exited(self) -> None:
        with self._klock:
            if self.state is not ToolState.RUNNING:
                return
            self.state = ToolState.EXITED
            self._rt.registry.discard(self)
            self._reap(time.monotonic())

    # -- termination ------------------------------------------------------

    def _begin_kill(self) -> bool:
        """Close the child's stdin and mark the handle killed.

        Returns False when there is nothing left to do (already killed or
        never alive). The kill trace line is emitted exactly once.
        """
        with self._klock:
            if self.state in (ToolState.KILLED, ToolState.EXITED):
                return False
            was_running = self.state is ToolState.RUNNING
            with self._rt.cond:
                self.state = ToolState.KILLED
                self._rt.cond.notify_all()
            self._rt.registry.discard(self)
        self._rt.emit(TraceEvent(TraceKind.TOOL_KILL, self.id))
        if was_running:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
        return was_running

    def _reap(self, deadline: float) -> None:
        proc = self._proc
        try:
            proc.wait(timeout=max(0.0, deadline - time.monotonic()))
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()
        if self._reader is not None and self._reader is not threading.current_thread():
            self._reader.join(timeout=1.0)
        for stream in (proc.stdin, proc.stdout):
            try:
                stream.close()
            except OSError:
                pass

    def kill(self, grace: float | None = None) -> None:
        """Terminate the child and reap it; idempotent.

        The child's stdin is closed first and it gets ``grace`` seconds
        (the runtime's ``kill_grace`` by default) to exit before SIGKILL.
        """
        if grace is None:
            grace = self._rt.kill_grace
        if self._begin_kill():
            self._reap(time.monotonic() + grace)


def kill_all(tools: Iterable[Tool], grace: float) -> None:
    """Kill many tools sharing one grace deadline."""
    started = [t for t in tools if t._begin_kill()]
    deadline = time.monotonic() + grace
    for t in started:
        t._reap(deadline)


class ToolSource(Source):
    def __init__(self, tool: Tool):
        self.tool = tool

    def __repr__(self) -> str:
        return f"ToolSource({self.tool.id!r})"

    def poll(self):
        tool = self.tool
        if tool._slot is not None:
            line = tool._take()
            tool._rt.emit(TraceEvent(TraceKind.TOOL_RECEIVE, tool.id, line))
            return line
        if tool._eof or tool.state in (ToolState.KILLED, ToolState.EXITED):
            return EOF
        return None
