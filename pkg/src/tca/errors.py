"""Exceptions shared by the coordination primitives."""

from __future__ import annotations


class ShutdownInterrupt(Exception):
    """Raised in a blocked or newly started operation once the runtime has shut down."""


class ToolError(RuntimeError):
    def __init__(self, tool_id: str, message: str):
        super().__init__(f"tool {tool_id!r}: {message}")
        self.tool_id = tool_id


class ToolStateError(ToolError):
    """An operation was attempted in the wrong lifecycle state."""


class ToolSpawnError(ToolError):
    pass


class ToolBrokenPipe(ToolError):
    pass


class ToolEOF(ToolError):
    """The tool closed its standard output. Repeated on every later receive."""

    def __init__(self, tool_id: str):
        super().__init__(tool_id, "end of output")


class MuxError(RuntimeError):
    """Misuse of a mux: duplicate source, or registration while running."""


class HandlerError(RuntimeError):
    """A mux handler raised; the original exception is chained as ``__cause__``."""
