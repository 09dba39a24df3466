"""``tca`` command line: run the case studies or act as a stub tool."""

from __future__ import annotations

import argparse
import logging
import os
import shlex
import sys
from importlib import resources
from pathlib import Path

from . import stub
from .pingpong import pingpong
from .runtime import Runtime
from .simulator import TOOL_NAMES, scenario_commands, simulate, stub_command

log = logging.getLogger("tca")

COMMANDS = ("run-pingpong", "run-simulator", "stub")
DEFAULT_SCENARIOS = {"run-pingpong": "pingpong", "run-simulator": "quit-only"}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="tca",
        description="Run the ping-pong or simulator coordination against stub or real tools.",
        epilog="`tca stub --scenario FILE [ARGS...]` runs the scenario-driven stub tool.",
    )
    p.add_argument("command", choices=COMMANDS[:2], metavar="{run-pingpong,run-simulator,stub}")
    p.add_argument("--debug", action="store_true", help="write communication trace lines")
    p.add_argument("--trace-out", metavar="PATH", help="trace destination (default: stdout)")
    p.add_argument(
        "--tool-path",
        metavar="DIR",
        help="directory holding the stub scenarios (default: $TCA_TOOLPATH, then built-in)",
    )
    p.add_argument("--scenario-dir", metavar="DIR", help="scenario directory; overrides --tool-path")
    p.add_argument(
        "--tool",
        action="append",
        default=[],
        metavar="NAME=COMMAND",
        help="run tool NAME with COMMAND (shell-style words) instead of a stub; repeatable",
    )
    p.add_argument("--transcript-dir", metavar="DIR", help="have stubs record their wire traffic here")
    return p


def _scenario_dir(ns: argparse.Namespace, env) -> Path:
    chosen = ns.scenario_dir or ns.tool_path or env.get("TCA_TOOLPATH")
    if chosen:
        return Path(chosen)
    return Path(str(resources.files("tca") / "scenarios" / DEFAULT_SCENARIOS[ns.command]))


def _overrides(specs: list[str], known: tuple[str, ...]) -> dict[str, list[str]]:
    out = {}
    for spec in specs:
        name, sep, command = spec.partition("=")
        words = shlex.split(command)
        if not sep or not words:
            raise ValueError(f"--tool expects NAME=COMMAND, got {spec!r}")
        if name not in known:
            raise ValueError(f"unknown tool {name!r}; expected one of {', '.join(known)}")
        out[name] = words
    return out


def main(argv: list[str] | None = None, env=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    env = os.environ if env is None else env
    if argv and argv[0] == "stub":
        return stub.main(argv[1:])
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if ns.debug else logging.WARNING,
        stream=sys.stderr,
        format="%(name)s: %(message)s",
    )
    scenarios = _scenario_dir(ns, env)
    transcripts = Path(ns.transcript_dir) if ns.transcript_dir else None

    if ns.command == "run-pingpong":
        known = ("tool1", "tool2")
        commands = {
            name: stub_command(
                scenarios / f"{name}.tca",
                transcripts / f"{name}.txt" if transcripts else None,
            )
            for name in known
        }
    else:
        known = TOOL_NAMES
        commands = scenario_commands(scenarios, transcripts)
    try:
        commands.update(_overrides(ns.tool, known))
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"tca: error: {exc}", file=sys.stderr)
        return 1

    trace_file = None
    if ns.trace_out:
        try:
            trace_file = open(ns.trace_out, "w", encoding="utf-8")
        except OSError as exc:
            print(f"tca: cannot write trace to {ns.trace_out}: {exc}", file=sys.stderr)
            return 1
    try:
        rt = Runtime(debug=ns.debug, trace=trace_file)
        if ns.command == "run-pingpong":
            result = pingpong(commands["tool1"], commands["tool2"], rt)
        else:
            result = simulate(commands, rt)
        rt.shutdown()
    finally:
        if trace_file is not None:
            trace_file.close()
    for name, exc in result.errors:
        print(f"tca: process {name} failed: {exc}", file=sys.stderr)
    print(f"tca: {ns.command} finished: {result.outcome.value}", file=sys.stderr)
    return result.exit_status


if __name__ == "__main__":
    sys.exit(main())
