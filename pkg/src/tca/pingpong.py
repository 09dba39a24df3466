"""Two tools, two coordinator processes, two channels.

comp1 owns tool1 and turns each ``message`` event into a round trip
through comp2, acknowledging the event afterwards; a ``quit`` event is
passed back to tool1 and shuts everything down. comp2 owns tool2 and
answers each message from comp1 by evaluating it on tool2.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

from .errors import ToolEOF
from .runtime import RunResult, Runtime
from .terms import EXPR, make_term

log = logging.getLogger(__name__)


def pingpong(
    tool1_cmd: Sequence[str], tool2_cmd: Sequence[str], runtime: Runtime | None = None
) -> RunResult:
    rt = runtime or Runtime()
    chan12 = rt.channel("12")
    chan21 = rt.channel("21")

    def comp1() -> None:
        tool = rt.tool("comp1", tool1_cmd[0], *tool1_cmd[1:])
        tool.start()
        mux = rt.mux()

        def on_event(line: str) -> None:
            m = EXPR.match("rec-event", line)
            if m is None:
                log.debug("comp1: ignored line %r", line)
                return
            a = m[0]
            if a == "quit":
                tool.send("quit")
                rt.shutdown()
            else:
                chan12.send(a)
                chan21.receive()
                tool.send(make_term("snd-ack-event", [a]))

        def on_eof() -> None:
            raise ToolEOF(tool.id)

        mux.add(tool.source(), on_event, on_eof)
        mux.run()

    def comp2() -> None:
        tool = rt.tool("comp2", tool2_cmd[0], *tool2_cmd[1:])
        tool.start()
        mux = rt.mux()

        def on_message(a: str) -> None:
            if a == "quit":
                tool.kill()
                mux.stop()
                return
            tool.send(make_term("snd-eval", [a]))
            m = EXPR.match("rec-value", tool.receive())
            if m is not None:
                chan21.send(m[0])

        mux.add(chan12.source(), on_message)
        mux.run()

    return rt.run(comp1, comp2)
