"""Per-process event loop over channel and tool sources."""

from __future__ import annotations

import enum
import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import HandlerError, MuxError, ShutdownInterrupt

if TYPE_CHECKING:
    from .runtime import Runtime

log = logging.getLogger(__name__)


class _EOF:
    def __repr__(self) -> str:
        return "EOF"


EOF = _EOF()


class Source:
    """Something a mux can wait on.

    ``poll`` is called with the runtime condition held. It returns a
    message it has *taken* (the mux is then committed to dispatching it),
    :data:`EOF` once the source is terminal, or None if nothing is ready.
    """

    def poll(self) -> str | _EOF | None:
        raise NotImplementedError


class MuxOutcome(enum.Enum):
    STOPPED = "stopped"
    SHUTDOWN = "shutdown"


@dataclass
class _Entry:
    source: Source
    handler: Callable[[str], None]
    on_eof: Callable[[], None] | None
    terminal: bool = False


class Mux:
    """Waits on many sources and runs one handler at a time.

    Ready sources are scanned round-robin starting after the last one
    dispatched, so no source starves while others stay ready. A source
    that reaches end-of-stream calls ``on_eof`` once, if given, and is
    otherwise silently retired; the mux itself never auto-stops.
    """

    def __init__(self, runtime: Runtime):
        self._rt = runtime
        self._entries: list[_Entry] = []
        self._running = False
        self._stopped = False
        self._next = 0

    def add(
        self,
        source: Source,
        handler: Callable[[str], None],
        on_eof: Callable[[], None] | None = None,
    ) -> None:
        if self._running:
            raise MuxError("cannot add a source while the mux is running")
        if any(e.source is source for e in self._entries):
            raise MuxError(f"source {source!r} already registered")
        self._entries.append(_Entry(source, handler, on_eof))

    def stop(self) -> None:
        with self._rt.cond:
            self._stopped = True
            self._rt.cond.notify_all()

    @property
    def stopped(self) -> bool:
        return self._stopped

    def _pick(self):
        n = len(self._entries)
        for k in range(n):
            i = (self._next + k) % n
            entry = self._entries[i]
            if entry.terminal:
                continue
            got = entry.source.poll()
            if got is None:
                continue
            self._next = i + 1
            if got is EOF:
                entry.terminal = True
                if entry.on_eof is None:
                    log.debug("source %r reached end of stream", entry.source)
                    continue
            return entry, got
        return None

    def run(self) -> MuxOutcome:
        rt = self._rt
        if self._running:
            raise MuxError("mux is already running")
        self._running = True
        try:
            while True:
                with rt.cond:
                    while True:
                        if self._stopped:
                            return MuxOutcome.STOPPED
                        if rt.shut_down:
                            return MuxOutcome.SHUTDOWN
                        picked = self._pick()
                        if picked is not None:
                            break
                        rt.cond.wait()
                entry, got = picked
                try:
                    if got is EOF:
                        entry.on_eof()
                    else:
                        entry.handler(got)
                except ShutdownInterrupt:
                    return MuxOutcome.SHUTDOWN
                except Exception as exc:
                    raise HandlerError(f"handler for {entry.source!r} failed: {exc}") from exc
        finally:
            self._running = False
