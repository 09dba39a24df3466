"""Scenario-driven stand-in for a real tool.

A scenario is a small line-oriented script::

    # tool1 of the ping-pong example
    mode script
    start send snd-event(message)
    on ^snd-ack-event\\(message\\)$ send snd-event(quit)
    on ^quit$ exit

``start`` rules fire without input, ``on <pattern>`` rules fire on a
whole input line matching the anchored pattern. A rule's inline action
can be followed by indented ``send``/``exit`` lines that add more actions.
Replies may use ``$1``.. for captures, ``$0`` for the whole line,
``$ARG1``.. for the stub's trailing command-line arguments and ``$$`` for
a dollar sign.

In ``script`` mode rules are consumed strictly in order and any other
input is a conformance violation (exit status 2). In ``reactive`` mode
every line is tried against all ``on`` rules, first match wins, and
unmatched lines are ignored.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from dataclasses import dataclass, field
from typing import BinaryIO, TextIO

from .terms import is_anchored, iter_frames

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VIOLATION = 2

_SUBST = re.compile(r"\$(?:(\$)|ARG(\d+)|(\d+))")


class ScenarioSyntaxError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass
class Action:
    kind: str  # "send" or "exit"
    text: str = ""


@dataclass
class Rule:
    pattern: re.Pattern[str] | None  # None for a start rule
    actions: list[Action] = field(default_factory=list)
    lineno: int = 0

    @property
    def is_start(self) -> bool:
        return self.pattern is None

    def describe(self) -> str:
        return "start" if self.pattern is None else self.pattern.pattern


@dataclass
class StubScenario:
    mode: str
    rules: list[Rule]


def _split_pattern(rest: str, lineno: int) -> tuple[str, str]:
    """Split ``<pattern> [action]``; the pattern ends at its first unescaped ``$``."""
    if not rest.startswith("^"):
        raise ScenarioSyntaxError(lineno, f"pattern must be anchored with ^...$: {rest!r}")
    i = 0
    while i < len(rest):
        c = rest[i]
        if c == "\\":
            i += 2
            continue
        if c == "$" and (i + 1 == len(rest) or rest[i + 1].isspace()):
            return rest[: i + 1], rest[i + 1 :].strip()
        i += 1
    raise ScenarioSyntaxError(lineno, f"pattern must be anchored with ^...$: {rest!r}")


def _parse_action(text: str, lineno: int, groups: int) -> Action:
    word, _, arg = text.partition(" ")
    if word == "exit":
        if arg.strip():
            raise ScenarioSyntaxError(lineno, "exit takes no argument")
        return Action("exit")
    if word == "send":
        arg = arg.strip()
        if not arg:
            raise ScenarioSyntaxError(lineno, "empty send line")
        for m in _SUBST.finditer(arg):
            if m.group(3) is not None and int(m.group(3)) > groups:
                raise ScenarioSyntaxError(
                    lineno, f"${m.group(3)} refers to a missing capture group"
                )
        return Action("send", arg)
    raise ScenarioSyntaxError(lineno, f"unknown action {word!r}")


def scenario_parse(text: str) -> StubScenario:
    mode = "script"
    seen_mode = False
    rules: list[Rule] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "mode":
            if seen_mode or rules:
                raise ScenarioSyntaxError(lineno, "mode must come first and only once")
            if rest not in ("script", "reactive"):
                raise ScenarioSyntaxError(lineno, f"unknown mode {rest!r}")
            mode, seen_mode = rest, True
        elif word == "start":
            rule = Rule(None, lineno=lineno)
            if rest:
                rule.actions.append(_parse_action(rest, lineno, 0))
            rules.append(rule)
        elif word == "on":
            pattern, action = _split_pattern(rest, lineno)
            if not is_anchored(pattern):
                raise ScenarioSyntaxError(lineno, f"pattern must be anchored with ^...$: {pattern!r}")
            try:
                rx = re.compile(pattern)
            except re.error as exc:
                raise ScenarioSyntaxError(lineno, f"bad pattern {pattern!r}: {exc}") from None
            rule = Rule(rx, lineno=lineno)
            if action:
                rule.actions.append(_parse_action(action, lineno, rx.groups))
            rules.append(rule)
        elif word in ("send", "exit"):
            if not rules:
                raise ScenarioSyntaxError(lineno, f"{word} outside a rule")
            last = rules[-1]
            groups = 0 if last.pattern is None else last.pattern.groups
            last.actions.append(_parse_action(line, lineno, groups))
        else:
            raise ScenarioSyntaxError(lineno, f"unknown directive {word!r}")
    return StubScenario(mode, rules)


class _Finished(Exception):
    def __init__(self, status: int):
        self.status = status


class StubRunner:
    """Executes a scenario over a pair of binary streams."""

    def __init__(
        self,
        scenario: StubScenario,
        argv: list[str],
        stdin: BinaryIO,
        stdout: BinaryIO,
        stderr: TextIO,
        transcript: TextIO | None = None,
    ):
        self.scenario = scenario
        self.argv = argv
        self.stdin = stdin
        self.stdout = stdout
        self.stderr = stderr
        self.transcript = transcript

    def _note(self, text: str) -> None:
        if self.transcript is not None:
            self.transcript.write(text + "\n")
            self.transcript.flush()

    def _substitute(self, text: str, match: re.Match[str] | None) -> str:
        def repl(m: re.Match[str]) -> str:
            if m.group(1):
                return "$"
            if m.group(2) is not None:
                n = int(m.group(2))
                if not 1 <= n <= len(self.argv):
                    self.stderr.write(f"tca-stub: $ARG{n} not given on the command line\n")
                    raise _Finished(EXIT_USAGE)
                return self.argv[n - 1]
            n = int(m.group(3))
            return match.group(n) if match is not None else ""

        return _SUBST.sub(repl, text)

    def _fire(self, rule: Rule, match: re.Match[str] | None) -> None:
        for action in rule.actions:
            if action.kind == "exit":
                raise _Finished(EXIT_OK)
            line = self._substitute(action.text, match)
            self._note(f"out {line}")
            self.stdout.write(line.encode("utf-8") + b"\n")
            self.stdout.flush()

    def _violation(self, message: str) -> None:
        self._note(f"violation {message}")
        self.stderr.write(f"tca-stub: conformance violation: {message}\n")
        self.stderr.flush()
        raise _Finished(EXIT_VIOLATION)

    def run(self) -> int:
        self._note(" ".join(["args", *self.argv]))
        try:
            if self.scenario.mode == "script":
                self._run_script()
            else:
                self._run_reactive()
            status = EXIT_OK
        except _Finished as fin:
            status = fin.status
        except BrokenPipeError:
            status = EXIT_USAGE
        self._note(f"exit {status}")
        return status

    def _run_script(self) -> None:
        rules = self.scenario.rules
        idx = 0
        lines = iter_frames(self.stdin)
        while True:
            while idx < len(rules) and rules[idx].is_start:
                self._fire(rules[idx], None)
                idx += 1
            if idx == len(rules):
                self._note("end-of-script")
            line = next(lines, None)
            if line is None:
                if idx < len(rules):
                    self._violation(f"end of input, expected {rules[idx].describe()}")
                return
            self._note(f"in {line}")
            if idx == len(rules):
                self._violation(f"expected end of input, received {line!r}")
            rule = rules[idx]
            m = rule.pattern.fullmatch(line)
            if m is None:
                self._violation(f"expected {rule.describe()}, received {line!r}")
            idx += 1
            self._fire(rule, m)

    def _run_reactive(self) -> None:
        on_rules = []
        for rule in self.scenario.rules:
            if rule.is_start:
                self._fire(rule, None)
            else:
                on_rules.append(rule)
        for line in iter_frames(self.stdin):
            self._note(f"in {line}")
            for rule in on_rules:
                m = rule.pattern.fullmatch(line)
                if m is not None:
                    self._fire(rule, m)
                    break


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser(prog: str = "tca-stub") -> argparse.ArgumentParser:
    p = _Parser(prog=prog, description="Scenario-driven stub tool.")
    p.add_argument("--scenario", required=True, help="scenario file")
    p.add_argument(
        "--transcript",
        default=None,
        help="append a record of every line in/out to this file "
        "(default: $TCA_STUB_TRANSCRIPT)",
    )
    p.add_argument("args", nargs=argparse.REMAINDER, help="exposed to the scenario as $ARG1..")
    return p


def stub_main(
    scenario_path: str,
    args: list[str] | None = None,
    env: dict[str, str] | None = None,
    transcript_path: str | None = None,
) -> int:
    env = os.environ if env is None else env
    transcript_path = transcript_path or env.get("TCA_STUB_TRANSCRIPT") or None
    try:
        with open(scenario_path, encoding="utf-8") as fh:
            scenario = scenario_parse(fh.read())
    except OSError as exc:
        sys.stderr.write(f"tca-stub: cannot read scenario: {exc}\n")
        return EXIT_USAGE
    except ScenarioSyntaxError as exc:
        sys.stderr.write(f"tca-stub: {scenario_path}: {exc}\n")
        return EXIT_USAGE
    transcript = None
    try:
        if transcript_path:
            transcript = open(transcript_path, "a", encoding="utf-8")
        runner = StubRunner(
            scenario, list(args or []), sys.stdin.buffer, sys.stdout.buffer, sys.stderr, transcript
        )
        return runner.run()
    except OSError as exc:
        sys.stderr.write(f"tca-stub: {exc}\n")
        return EXIT_USAGE
    finally:
        if transcript is not None:
            transcript.close()


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    return stub_main(ns.scenario, ns.args, transcript_path=ns.transcript)


if __name__ == "__main__":
    sys.exit(main())
