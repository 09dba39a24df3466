"""Term text, line framing and anchored extraction patterns.

Messages are single lines of UTF-8 text such as ``snd-event(quit)``.
Tools speak ``snd-event(...)``/``snd-value(...)`` upward; coordinators
answer with ``snd-do``, ``snd-eval``, ``snd-ack-event`` or bare terms.
"""

from __future__ import annotations

import logging
import re
from collections.abc import Iterable, Iterator, Mapping
from typing import BinaryIO

log = logging.getLogger(__name__)

NEWLINE = b"\n"

BUILTIN_PATTERNS = {
    "rec-event": r"^snd-event\((.+)\)$",
    "rec-value": r"^snd-value\((.+)\)$",
}


class TermError(ValueError):
    """Raised for text that cannot be a Message."""


class PatternError(ValueError):
    """Raised for unanchored patterns or attempts to replace a built-in."""


class UnknownPattern(KeyError):
    """Lookup of a pattern name that was never defined."""


def check_message(text: str) -> str:
    if not isinstance(text, str):
        raise TermError(f"message must be str, got {type(text).__name__}")
    if not text:
        raise TermError("message must be non-empty")
    if "\n" in text or "\r" in text:
        raise TermError(f"message contains a line terminator: {text!r}")
    return text


def make_term(name: str, args: Iterable[str] = ()) -> str:
    """Render ``name`` or ``name(a1, a2, ...)``."""
    args = list(args)
    check_message(name)
    for a in args:
        if "\n" in a or "\r" in a:
            raise TermError(f"argument contains a line terminator: {a!r}")
    if not args:
        return name
    return f"{name}({', '.join(args)})"


def is_anchored(pattern: str) -> bool:
    """True when ``pattern`` starts with ``^`` and ends with an unescaped ``$``."""
    if not pattern.startswith("^") or not pattern.endswith("$"):
        return False
    # count backslashes immediately before the final '$'
    n = 0
    i = len(pattern) - 2
    while i >= 0 and pattern[i] == "\\":
        n += 1
        i -= 1
    return n % 2 == 0 and len(pattern) >= 2


def compile_anchored(pattern: str) -> re.Pattern[str]:
    if not is_anchored(pattern):
        raise PatternError(f"pattern is not anchored at both ends: {pattern!r}")
    try:
        return re.compile(pattern)
    except re.error as exc:
        raise PatternError(f"invalid pattern {pattern!r}: {exc}") from exc


class PatternTable(Mapping[str, re.Pattern[str]]):
    """Named anchored patterns; ``rec-event`` and ``rec-value`` are always present.

    Tables are immutable: :meth:`define` returns a new table.
    """

    def __init__(self, entries: Mapping[str, str] | None = None):
        self._entries: dict[str, re.Pattern[str]] = {
            k: re.compile(v) for k, v in BUILTIN_PATTERNS.items()
        }
        for name, pattern in (entries or {}).items():
            self._add(name, pattern)

    def _add(self, name: str, pattern: str) -> None:
        if name in BUILTIN_PATTERNS:
            raise PatternError(f"built-in pattern {name!r} cannot be redefined")
        self._entries[name] = compile_anchored(pattern)

    def define(self, name: str, pattern: str) -> PatternTable:
        new = PatternTable.__new__(PatternTable)
        new._entries = dict(self._entries)
        new._add(name, pattern)
        return new

    def match(self, name: str, line: str) -> list[str] | None:
        """Capture groups of ``line`` under pattern ``name``, or None if it does not match."""
        try:
            rx = self._entries[name]
        except KeyError:
            raise UnknownPattern(name) from None
        m = rx.fullmatch(line)
        if m is None:
            return None
        return list(m.groups())

    def __getitem__(self, name: str) -> re.Pattern[str]:
        return self._entries[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)


EXPR = PatternTable()


def match_extract(table: PatternTable, name: str, line: str) -> list[str] | None:
    return table.match(name, line)


def define_pattern(table: PatternTable, name: str, pattern: str) -> PatternTable:
    return table.define(name, pattern)


def frame_encode(message: str) -> bytes:
    return check_message(message).encode("utf-8") + NEWLINE


def iter_frames(stream: BinaryIO) -> Iterator[str]:
    """Yield newline-terminated lines from a binary stream, terminator stripped.

    The iterator ending is the end-of-stream signal; an empty line is
    yielded as ``""``. A final fragment without a newline is dropped and
    logged.
    """
    while True:
        raw = stream.readline()
        if not raw:
            return
        if not raw.endswith(NEWLINE):
            log.warning("discarding truncated frame at end of stream: %r", raw)
            return
        yield raw[:-1].decode("utf-8", errors="replace")


def frame_decode(data: bytes) -> tuple[list[str], bytes]:
    """Split ``data`` into complete lines and the unterminated tail (if any)."""
    *lines, tail = data.split(NEWLINE)
    if tail:
        log.warning("discarding truncated frame at end of stream: %r", tail)
    return [ln.decode("utf-8", errors="replace") for ln in lines], tail
