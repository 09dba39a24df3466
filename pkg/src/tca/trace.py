"""Debug trace records and the line-atomic sink they are written to."""

from __future__ import annotations

import enum
import sys
import threading
from dataclasses import dataclass
from typing import TextIO


class TraceKind(enum.Enum):
    CHAN_SEND = "chan-send"
    TOOL_SEND = "tool-send"
    TOOL_RECEIVE = "tool-receive"
    TOOL_KILL = "tool-kill"


@dataclass(frozen=True)
class TraceEvent:
    kind: TraceKind
    entity: str
    payload: str | None = None

    def render(self) -> str:
        if self.kind is TraceKind.CHAN_SEND:
            return f"TCA chan snd {self.entity} : {self.payload}"
        if self.kind is TraceKind.TOOL_SEND:
            return f"TCA {self.entity} send: {self.payload}"
        if self.kind is TraceKind.TOOL_RECEIVE:
            return f"TCA {self.entity} receive: {self.payload}"
        return f"TCA tool {self.entity} killed"


class TraceSink:
    """Writes whole lines under a lock so concurrent writers never interleave.

    With ``stream=None`` the current ``sys.stdout`` is looked up on every
    write, which keeps output capture in tests working.
    """

    def __init__(self, stream: TextIO | None = None):
        self._stream = stream
        self._lock = threading.Lock()

    @property
    def stream(self) -> TextIO:
        return self._stream if self._stream is not None else sys.stdout

    def write_line(self, line: str) -> None:
        with self._lock:
            out = self.stream
            out.write(line + "\n")
            out.flush()


class ListSink(TraceSink):
    """Collects rendered lines in memory."""

    def __init__(self) -> None:
        super().__init__()
        self.lines: list[str] = []

    def write_line(self, line: str) -> None:
        with self._lock:
            self.lines.append(line)
