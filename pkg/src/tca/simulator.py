"""Coordination topology of the PSF simulator: eight processes, one tool each.

Every process owns its tool and talks to the others only through the
24 rendezvous channels below. Channel keys name the direction: ``kt`` is
kernel to tracectrl, ``ta`` tracectrl to actionchooser, and so on. The
``ad`` channel exists in the map but no process uses it; ``dk`` is
likewise unused.
"""

from __future__ import annotations

import logging
import sys
from collections.abc import Mapping, Sequence
from pathlib import Path

from .errors import ToolEOF
from .mux import Mux
from .runtime import RunResult, Runtime
from .terms import EXPR, make_term

log = logging.getLogger(__name__)

CHANNEL_KEYS = (
    "gf", "gp", "gt", "gb", "gd", "ga",
    "kf", "kt", "kb", "kp", "ka", "kd", "kg",
    "ta", "td", "ba", "bd", "at", "ab", "ad", "ak",
    "pk", "dk", "fk",
)  # fmt: skip

TOOL_NAMES = (
    "gui", "kernel", "tracectrl", "breakctrl", "process", "display", "actionchooser", "function",
)  # fmt: skip

# gui's six window ids, in event order, go to these channels
WINDOW_ROUTES = ("gf", "gp", "gt", "gb", "gd", "ga")

PATTERNS = (
    EXPR.define("windows", r"^window\((.*),\s*(.*),\s*(.*),\s*(.*),\s*(.*),\s*(.*)\)$")
    .define("window", r"^window\((.*)\)$")
    .define("start", r"^start\((.*),\s*(.*)\)$")
    .define("action", r"^action\(info\((.*),\s*(.*),\s*(.*),\s*(.*)\)\)$")
    .define("action-single", r"^action\((.*)\)$")
    .define("break", r"^break\((.*)\)$")
    .define("random", r"^random\((.*)\)$")
)


def do(term: str) -> str:
    return make_term("snd-do", [term])


def eval_(term: str) -> str:
    return make_term("snd-eval", [term])


def ack(term: str) -> str:
    return make_term("snd-ack-event", [term])


class Topology:
    """The channel map plus the command used to start each tool."""

    def __init__(self, runtime: Runtime, commands: Mapping[str, Sequence[str]]):
        missing = set(TOOL_NAMES) - set(commands)
        if missing:
            raise ValueError(f"no command for tools: {sorted(missing)}")
        self.runtime = runtime
        self.commands = {k: list(v) for k, v in commands.items()}
        self.ch = {key: runtime.channel(key) for key in CHANNEL_KEYS}


class Coordinator:
    """One simulator process.

    Subclasses list the channels they select on in ``listens`` and
    implement ``on_<key>`` for each, plus ``on_tool`` when the tool's
    output is one of the selected sources. Handlers are plain methods so
    they can be driven one line at a time in tests.
    """

    name = ""
    window: str | None = None
    listens: tuple[str, ...] = ()
    reads_tool = False

    def __init__(self, topology: Topology):
        self.topology = topology
        self.rt = topology.runtime
        self.ch = topology.ch
        self.tool = None
        self.mux: Mux | None = None
        self.__name__ = "P" + self.name

    def __call__(self) -> None:
        args = []
        if self.window is not None:
            a = self.ch[self.window].receive()
            m = PATTERNS.match("window", a)
            if m is None:
                log.warning("%s: expected window(...) on %s, got %r", self.name, self.window, a)
            else:
                args.append(m[0])
        cmd = self.topology.commands[self.name]
        self.tool = self.rt.tool(self.name, cmd[0], *cmd[1:], *args)
        self.tool.start()
        self.startup()
        self.mux = self.rt.mux()
        for key in self.listens:
            self.mux.add(self.ch[key].source(), getattr(self, f"on_{key}"))
        if self.reads_tool:
            self.mux.add(self.tool.source(), self.on_tool, self.on_tool_eof)
        self.mux.run()

    def startup(self) -> None:
        pass

    def stop(self) -> None:
        self.tool.kill()
        self.mux.stop()

    def ignore(self, where: str, line: str) -> None:
        log.debug("%s: ignored line from %s: %r", self.name, where, line)

    def on_tool_eof(self) -> None:
        raise ToolEOF(self.tool.id)


class Gui(Coordinator):
    name = "gui"
    listens = ("kg",)
    reads_tool = True

    def on_tool(self, line: str) -> None:
        m = PATTERNS.match("rec-event", line)
        if m is None:
            return self.ignore("tool", line)
        self.tool.send(ack(m[0]))
        w = PATTERNS.match("windows", m[0])
        if w is None:
            return
        for key, wid in zip(WINDOW_ROUTES, w):
            self.ch[key].send(make_term("window", [wid]))

    def on_kg(self, a: str) -> None:
        if a == "quit":
            self.stop()


class Kernel(Coordinator):
    name = "kernel"
    listens = ("pk", "ak", "fk")
    reads_tool = True

    def startup(self) -> None:
        self.tool.send(eval_("get-action-info"))

    def on_tool(self, line: str) -> None:
        m = PATTERNS.match("rec-value", line)
        if m is None:
            return self.ignore("tool", line)
        v = m[0]
        if v.startswith("action-info"):
            self.ch["kt"].send(v)
            self.ch["kb"].send(v)
            self.tool.send(eval_("get-process-list"))
        elif v.startswith("process-list"):
            self.ch["kp"].send(v)
        elif v.startswith("action-choose-list"):
            self.ch["ka"].send(v)
        elif v.startswith("halt"):
            self.ch["ka"].send(v)
            self.ch["kd"].send(v)
        elif v.startswith("process-status"):
            self.ch["kd"].send(v)
        elif v.startswith("quit"):
            self.rt.shutdown()
        else:
            self.ignore("tool", line)

    def on_pk(self, a: str) -> None:
        m = PATTERNS.match("start", a)
        if m is not None:
            self.ch["kd"].send(make_term("start", [m[1]]))
            self.tool.send(do(a))
            self.tool.send(eval_("compute-choose-list"))
        elif a == "reset":
            self.tool.send(do("myreset"))
            self.ch["kd"].send("reset")
            self.ch["ka"].send("reset")
            self.tool.send(eval_("compute-choose-list"))
        else:
            self.ignore("pk", a)

    def on_ak(self, a: str) -> None:
        m = PATTERNS.match("action", a)
        if m is not None:
            i, j, _shown, act = m
            self.tool.send(do(make_term("action", [i, j, act])))
            self.tool.send(eval_("compute-choose-list"))
        elif a.startswith("save"):
            self.tool.send(do(a))
        elif a.startswith("goto"):
            self.tool.send(do("my" + a))
            self.tool.send(eval_("compute-choose-list"))
        else:
            self.ignore("ak", a)

    def on_fk(self, a: str) -> None:
        if a in ("quit", "process-status"):
            self.tool.send(eval_(a))
        else:
            self.ignore("fk", a)


class Process(Coordinator):
    name = "process"
    window = "gp"
    listens = ("kp",)
    reads_tool = True

    def on_kp(self, a: str) -> None:
        if a.startswith("process-list"):
            self.tool.send(do(a))
        elif a == "quit":
            self.stop()

    def on_tool(self, line: str) -> None:
        m = PATTERNS.match("rec-event", line)
        if m is None:
            return self.ignore("tool", line)
        e = m[0]
        if e.startswith("start") or e == "reset":
            self.ch["pk"].send(e)
            self.tool.send(ack(e))
        else:
            self.ignore("tool", line)


class TraceCtrl(Coordinator):
    name = "tracectrl"
    window = "gt"
    listens = ("kt", "at")
    reads_tool = True

    def __init__(self, topology: Topology):
        super().__init__(topology)
        self.action = ""

    def on_kt(self, a: str) -> None:
        if a.startswith("action-info"):
            self.tool.send(do(a))
        elif a == "quit":
            self.stop()

    def on_at(self, a: str) -> None:
        m = PATTERNS.match("action-single", a)
        if m is not None:
            self.action = m[0]
            self.tool.send(eval_(a))

    def on_tool(self, line: str) -> None:
        m = PATTERNS.match("rec-value", line)
        if m is None:
            return self.ignore("tool", line)
        if m[0] == "trace":
            self.ch["td"].send(make_term("trace", [self.action]))
        self.ch["ta"].send("done")


class BreakCtrl(Coordinator):
    name = "breakctrl"
    window = "gb"
    listens = ("kb", "ab")
    reads_tool = True

    def __init__(self, topology: Topology):
        super().__init__(topology)
        self.action = ""

    def on_kb(self, a: str) -> None:
        if a.startswith("action-info"):
            self.tool.send(do(a))
        elif a == "quit":
            self.stop()

    def on_ab(self, a: str) -> None:
        m = PATTERNS.match("action-single", a)
        if m is not None:
            self.action = m[0]
            self.tool.send(eval_(a))
        elif a.startswith("action-choose-list"):
            self.tool.send(eval_(a))

    def on_tool(self, line: str) -> None:
        m = PATTERNS.match("rec-value", line)
        if m is None:
            return self.ignore("tool", line)
        if m[0] == "break":
            self.ch["bd"].send(make_term("break", [self.action]))
            self.ch["ba"].send("break")
        else:
            self.ch["ba"].send("nobreak")


class Display(Coordinator):
    """Only reads its tool right after an eval, to collect the answer."""

    name = "display"
    window = "gd"
    listens = ("kd", "td", "bd")

    def on_kd(self, a: str) -> None:
        if a.startswith("process-status"):
            self.tool.send(eval_(a))
            self.tool.receive()
        elif a == "quit":
            self.stop()
        else:
            self.tool.send(do(a))

    def on_td(self, a: str) -> None:
        self.tool.send(eval_(a))
        self.tool.receive()

    def on_bd(self, a: str) -> None:
        m = PATTERNS.match("break", a)
        if m is not None:
            self.tool.send(do(make_term("break-action", [m[0]])))
        else:
            self.ignore("bd", a)


class ActionChooser(Coordinator):
    name = "actionchooser"
    window = "ga"
    listens = ("ka",)
    reads_tool = True

    def __init__(self, topology: Topology):
        super().__init__(topology)
        self.random = False
        self.acl = ""
        self.action = ""

    def _random_off(self) -> None:
        self.random = False
        self.tool.send(do("random-off"))

    def on_ka(self, a: str) -> None:
        if a.startswith("action-choose-list"):
            self.acl = a
            if self.random:
                self.ch["ab"].send(a)
                if self.ch["ba"].receive() == "break":
                    self._random_off()
            self.tool.send(do(self.acl))
        elif a == "halt":
            self.tool.send(do("random-off"))
            self.random = False
            self.tool.send(do("halt"))
        elif a == "reset":
            self.tool.send(do("reset"))
        elif a == "quit":
            self.stop()

    def on_tool(self, line: str) -> None:
        m = PATTERNS.match("rec-event", line)
        if m is None:
            return self.ignore("tool", line)
        e = m[0]
        r = PATTERNS.match("random", e)
        if r is not None:
            self.random = r[0] == "on"
            self.tool.send(ack(e))
        elif e.startswith("save") or e.startswith("goto"):
            self.tool.send(ack(e))
            self.ch["ak"].send(e)
        elif e.startswith("action"):
            self.tool.send(ack(e))
            self.ch["ak"].send(e)
            if self.random:
                self.ch["ab"].send(e)
                self.action = e
                b = self.ch["ba"].receive()
                if b == "break":
                    self._random_off()
                elif b == "nobreak":
                    self.ch["at"].send(self.action)
                    self.ch["ta"].receive()
            else:
                self.ch["at"].send(e)
                self.ch["ta"].receive()
        else:
            self.ignore("tool", line)


class Function(Coordinator):
    name = "function"
    window = "gf"
    listens = ("kf",)
    reads_tool = True

    def on_tool(self, line: str) -> None:
        m = PATTERNS.match("rec-event", line)
        if m is None:
            return self.ignore("tool", line)
        if m[0] in ("quit", "process-status"):
            self.ch["fk"].send(m[0])
        else:
            self.ignore("tool", line)

    def on_kf(self, a: str) -> None:
        if a == "quit":
            self.stop()


# start order of the processes
PROCESSES = (Gui, Kernel, TraceCtrl, BreakCtrl, Process, Display, ActionChooser, Function)


def stub_command(scenario: str | Path, transcript: str | Path | None = None) -> list[str]:
    cmd = [sys.executable, "-m", "tca.stub", "--scenario", str(scenario)]
    if transcript is not None:
        cmd += ["--transcript", str(transcript)]
    return cmd


def scenario_commands(
    scenario_dir: str | Path, transcript_dir: str | Path | None = None
) -> dict[str, list[str]]:
    """Stub commands for every tool, reading ``<name>.tca`` from ``scenario_dir``."""
    scenario_dir = Path(scenario_dir)
    cmds = {}
    for name in TOOL_NAMES:
        t = Path(transcript_dir) / f"{name}.txt" if transcript_dir is not None else None
        cmds[name] = stub_command(scenario_dir / f"{name}.tca", t)
    return cmds


def simulate(commands: Mapping[str, Sequence[str]], runtime: Runtime | None = None) -> RunResult:
    runtime = runtime or Runtime()
    topology = Topology(runtime, commands)
    return runtime.run(*(cls(topology) for cls in PROCESSES))
