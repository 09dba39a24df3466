"""Tool coordination primitives: rendezvous channels, stdio tools, muxes and a runtime."""

from .channel import Channel
from .errors import (
    HandlerError,
    MuxError,
    ShutdownInterrupt,
    ToolBrokenPipe,
    ToolEOF,
    ToolError,
    ToolSpawnError,
    ToolStateError,
)
from .mux import EOF, Mux, MuxOutcome, Source
from .runtime import RunOutcome, RunResult, Runtime, ToolRegistry
from .terms import EXPR, PatternTable, define_pattern, frame_decode, frame_encode, make_term, match_extract
from .tool import Tool, ToolState
from .trace import ListSink, TraceEvent, TraceKind, TraceSink

__all__ = [
    "Channel", "EOF", "EXPR", "HandlerError", "ListSink", "Mux", "MuxError", "MuxOutcome",
    "PatternTable", "RunOutcome", "RunResult", "Runtime", "ShutdownInterrupt", "Source",
    "Tool", "ToolBrokenPipe", "ToolEOF", "ToolError", "ToolRegistry", "ToolSpawnError",
    "ToolState", "ToolStateError", "TraceEvent", "TraceKind", "TraceSink",
    "define_pattern", "frame_decode", "frame_encode", "make_term", "match_extract",
]
