"""A small interpreter for CRExplorer-style analysis scripts.

Supported commands and their arguments::

    importFile(file: "x.txt", type: "WOS", RPY: [1950, 1990, false], PY: [1988, 2017, false], maxCR: 0)
    cluster(threshold: 0.75, volume: true, page: true, DOI: false)
    merge()
    removeCR(N_CR: [0, 99])
    exportFile(file: "out.csv", type: "CSV_CR")      # or CSV_GRAPH, SVG_GRAPH

Whitespace and newlines between tokens are insignificant and ``//``
starts a comment that runs to the end of the line.
"""
from __future__ import annotations

import json
import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

from .cluster import ClusterConfig, cluster, merge, remove_cr
from .export import cr_csv_text, graph_csv_text, render_svg
from .model import AggregatedCR, CitedRef, Corpus, RPYSError, YearRange
from .spectroscopy import Spectrogram, compute_spectrogram
from .wos import ImportConfig, read_corpus

__all__ = [
    "AnalysisSession",
    "Command",
    "CommandFailed",
    "InvalidValue",
    "MissingArgument",
    "ScriptError",
    "ScriptIOError",
    "ScriptSyntaxError",
    "StateError",
    "TypeMismatch",
    "UnknownArgument",
    "UnknownCommand",
    "execute",
    "format_script",
    "parse_script",
    "run_script",
]

log = logging.getLogger(__name__)


class ScriptError(RPYSError):
    """Problem with a script; ``line``/``column`` locate it when known."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class ScriptSyntaxError(ScriptError):
    pass


class UnknownCommand(ScriptError):
    pass


class UnknownArgument(ScriptError):
    pass


class MissingArgument(ScriptError):
    pass


class TypeMismatch(ScriptError):
    pass


class InvalidValue(ScriptError):
    pass


class CommandFailed(ScriptError):
    """A command raised during execution; ``index`` is 1-based."""

    def __init__(self, index: int, command: "Command", message: str):
        self.index = index
        self.command = command
        super().__init__(f"command {index} ({command.name}, line {command.line}): {message}")


class StateError(CommandFailed):
    pass


class ScriptIOError(CommandFailed):
    pass


@dataclass(frozen=True)
class Command:
    name: str
    args: dict = field(default_factory=dict)
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


# --- schema -----------------------------------------------------------------

_REQUIRED = object()

# argument name -> (kind, default); defaults mirror the usual CRExplorer values
SCHEMAS: dict[str, dict[str, tuple[str, Any]]] = {
    "importFile": {
        "file": ("str", _REQUIRED),
        "type": ("str", "WOS"),
        "RPY": ("range", None),
        "PY": ("range", None),
        "maxCR": ("int", 0),
    },
    "cluster": {
        "threshold": ("number", 0.75),
        "volume": ("bool", True),
        "page": ("bool", True),
        "DOI": ("bool", False),
        "crossRPY": ("bool", False),
    },
    "merge": {},
    "removeCR": {"N_CR": ("pair", _REQUIRED)},
    "exportFile": {
        "file": ("str", _REQUIRED),
        "type": ("str", _REQUIRED),
    },
}

IMPORT_TYPES = ("WOS", "CSV")
EXPORT_TYPES = ("CSV_CR", "CSV_GRAPH", "SVG_GRAPH")


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _check_kind(kind: str, value) -> bool:
    if kind == "str":
        return isinstance(value, str)
    if kind == "int":
        return _is_int(value)
    if kind == "number":
        return _is_int(value) or isinstance(value, float)
    if kind == "bool":
        return isinstance(value, bool)
    if kind == "pair":
        return isinstance(value, list) and len(value) == 2 and all(_is_int(v) for v in value)
    if kind == "range":
        return (
            isinstance(value, list)
            and len(value) in (2, 3)
            and all(_is_int(v) for v in value[:2])
            and (len(value) == 2 or isinstance(value[2], bool))
        )
    raise AssertionError(kind)


_KIND_NAMES = {
    "str": "a string",
    "int": "an integer",
    "number": "a number",
    "bool": "a boolean",
    "pair": "a list [lo, hi] of integers",
    "range": "a list [lo, hi, flag]",
}


def _validate(command: Command, positions: dict[str, tuple[int, int]]) -> Command:
    schema = SCHEMAS.get(command.name)
    if schema is None:
        raise UnknownCommand(f"unknown command {command.name!r}", command.line, command.column)
    args = {}
    for name, value in command.args.items():
        line, col = positions[name]
        if name not in schema:
            raise UnknownArgument(f"{command.name} has no argument {name!r}", line, col)
        kind, _ = schema[name]
        if not _check_kind(kind, value):
            raise TypeMismatch(f"{command.name}: {name} must be {_KIND_NAMES[kind]}, got {value!r}", line, col)
        args[name] = value
    for name, (_, default) in schema.items():
        if default is _REQUIRED and name not in args:
            raise MissingArgument(f"{command.name} requires argument {name!r}", command.line, command.column)

    def bad(name, message):
        line, col = positions[name]
        return InvalidValue(f"{command.name}: {message}", line, col)

    if command.name == "importFile" and "type" in args and args["type"].upper() not in IMPORT_TYPES:
        raise bad("type", f"unknown import type {args['type']!r}")
    if command.name == "exportFile" and args["type"].upper() not in EXPORT_TYPES:
        raise bad("type", f"unknown export type {args['type']!r}")
    if command.name == "cluster" and "threshold" in args and not 0 <= args["threshold"] <= 1:
        raise bad("threshold", "threshold must lie in [0, 1]")
    for name in ("RPY", "PY", "N_CR"):
        if name in args and args[name][0] > args[name][1]:
            raise bad(name, f"{name} lower bound exceeds upper bound")
    if command.name == "importFile" and args.get("maxCR", 0) < 0:
        raise bad("maxCR", "maxCR must be >= 0")
    return command


# --- parsing ----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[()\[\]:,])
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ScriptSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self, kind: str, text: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = repr(text) if text else kind
            got = repr(tok.text) if tok.kind != "eof" else "end of script"
            raise ScriptSyntaxError(f"expected {want}, found {got}", tok.line, tok.column)
        self.i += 1
        return tok

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def script(self) -> list[Command]:
        commands = []
        while not self.at("eof"):
            commands.append(self.command())
        return commands

    def command(self) -> Command:
        name = self.take("ident")
        if name.text not in SCHEMAS:
            raise UnknownCommand(f"unknown command {name.text!r}", name.line, name.column)
        self.take("punct", "(")
        args: dict[str, Any] = {}
        positions: dict[str, tuple[int, int]] = {}
        if not self.at("punct", ")"):
            while True:
                key = self.take("ident")
                if key.text in args:
                    raise ScriptSyntaxError(f"duplicate argument {key.text!r}", key.line, key.column)
                self.take("punct", ":")
                args[key.text] = self.value()
                positions[key.text] = (key.line, key.column)
                if self.at("punct", ","):
                    self.take("punct", ",")
                    continue
                break
        self.take("punct", ")")
        return _validate(Command(name.text, args, name.line, name.column), positions)

    def value(self):
        tok = self.peek()
        if tok.kind == "string":
            self.i += 1
            try:
                return json.loads(tok.text)
            except ValueError:
                raise ScriptSyntaxError(f"invalid escape in string {tok.text}", tok.line, tok.column) from None
        if tok.kind == "number":
            self.i += 1
            if re.fullmatch(r"-?\d+", tok.text):
                return int(tok.text)
            return float(tok.text)
        if tok.kind == "ident" and tok.text in ("true", "false"):
            self.i += 1
            return tok.text == "true"
        if tok.kind == "punct" and tok.text == "[":
            self.i += 1
            items = []
            if not self.at("punct", "]"):
                items.append(self.value())
                while self.at("punct", ","):
                    self.take("punct", ",")
                    items.append(self.value())
            self.take("punct", "]")
            return items
        got = repr(tok.text) if tok.kind != "eof" else "end of script"
        raise ScriptSyntaxError(f"expected a value, found {got}", tok.line, tok.column)


def parse_script(text: str) -> list[Command]:
    """Parse script text into validated :class:`Command` objects."""
    return _Parser(text).script()


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, list):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    return repr(value)


def format_script(commands: Sequence[Command]) -> str:
    lines = []
    for cmd in commands:
        args = ", ".join(f"{k}: {_format_value(v)}" for k, v in cmd.args.items())
        lines.append(f"{cmd.name}({args})")
    return "\n".join(lines) + ("\n" if lines else "")


# --- execution --------------------------------------------------------------


@dataclass
class AnalysisSession:
    """State threaded through the commands of one script run."""

    corpus: Optional[Corpus] = None
    occurrences: list[CitedRef] = field(default_factory=list)
    clusters: Optional[list] = None
    aggregates: Optional[list[AggregatedCR]] = None
    rpy_range: Optional[YearRange] = None
    window: int = 5
    history: list[Command] = field(default_factory=list)
    outputs: dict[Path, str] = field(default_factory=dict)

    def spectrogram(self) -> Spectrogram:
        rpy_range = self.rpy_range
        if rpy_range is None:
            years = [a.rpy for a in self.aggregates or () if a.rpy is not None]
            if not years:
                return Spectrogram((), (), self.window)
            rpy_range = YearRange(min(years), max(years))
        return compute_spectrogram(self.aggregates or (), rpy_range, self.window)


def _resolve(base, name: str) -> Path:
    path = Path(name)
    return path if path.is_absolute() else Path(base) / path


def _year_range(value) -> YearRange:
    return YearRange(value[0], value[1], value[2] if len(value) == 3 else False)


def _run_command(cmd: Command, index: int, session: AnalysisSession, data_dir, out_dir) -> Optional[Path]:
    args = {name: args_default for name, (_, args_default) in SCHEMAS[cmd.name].items()}
    args.update(cmd.args)

    def require(condition: bool, message: str):
        if not condition:
            raise StateError(index, cmd, message)

    if cmd.name == "importFile":
        wide = YearRange(1500, 2100, True)
        rpy = _year_range(args["RPY"]) if args["RPY"] else wide
        py = _year_range(args["PY"]) if args["PY"] else wide
        config = ImportConfig(rpy_range=rpy, py_range=py, max_cr_per_record=args["maxCR"])
        path = _resolve(data_dir, args["file"])
        try:
            corpus = read_corpus(path, args["type"], config)
        except OSError as exc:
            raise ScriptIOError(index, cmd, f"cannot read {path}: {exc.strerror or exc}") from exc
        session.corpus = corpus
        session.occurrences = corpus.occurrences()
        session.clusters = None
        session.aggregates = None
        session.rpy_range = rpy if args["RPY"] else None
        log.info("imported %d records, %d cited references", len(corpus), len(session.occurrences))

    elif cmd.name == "cluster":
        require(session.corpus is not None, "cluster requires a prior importFile")
        config = ClusterConfig(
            threshold=float(args["threshold"]),
            require_volume_match=args["volume"],
            require_page_match=args["page"],
            require_doi_match=args["DOI"],
            cross_rpy=args["crossRPY"],
        )
        session.clusters = cluster(session.occurrences, config)
        session.aggregates = None

    elif cmd.name == "merge":
        require(session.corpus is not None, "merge requires a prior importFile")
        require(session.clusters is not None, "merge requires a prior cluster")
        session.aggregates = merge(session.clusters, session.occurrences)

    elif cmd.name == "removeCR":
        require(session.corpus is not None, "removeCR requires a prior importFile")
        require(session.aggregates is not None, "removeCR requires merged CRs (run cluster and merge first)")
        session.aggregates = remove_cr(session.aggregates, tuple(args["N_CR"]))

    elif cmd.name == "exportFile":
        require(session.corpus is not None, "exportFile requires a prior importFile")
        require(session.aggregates is not None, "exportFile requires merged CRs (run cluster and merge first)")
        kind = args["type"].upper()
        if kind == "CSV_CR":
            text = cr_csv_text(session.aggregates)
        elif kind == "CSV_GRAPH":
            text = graph_csv_text(session.spectrogram())
        else:
            spec = session.spectrogram()
            require(len(spec) > 0, "SVG_GRAPH needs at least one year with cited references")
            text = render_svg(spec)
        target = _resolve(out_dir, args["file"])
        session.outputs[target] = text
        return target
    return None


def execute(
    commands: Sequence[Command],
    session: Optional[AnalysisSession] = None,
    data_dir: os.PathLike | str = ".",
    out_dir: os.PathLike | str = ".",
    write: bool = True,
) -> AnalysisSession:
    """Run ``commands`` in order against ``session``.

    Exports are rendered into ``session.outputs`` and only written to disk
    once every command has succeeded, so a failing script leaves no
    partial output behind. Errors are raised as :class:`CommandFailed`
    subclasses carrying the 1-based command index.
    """
    session = session if session is not None else AnalysisSession()
    pending: dict[Path, tuple[int, Command]] = {}
    for index, cmd in enumerate(commands, start=1):
        try:
            target = _run_command(cmd, index, session, data_dir, out_dir)
            if target is not None:
                pending[target] = (index, cmd)
        except CommandFailed:
            raise
        except RPYSError as exc:
            raise CommandFailed(index, cmd, str(exc)) from exc
        except ValueError as exc:
            raise CommandFailed(index, cmd, str(exc)) from exc
        session.history.append(cmd)

    if write:
        for path, (index, cmd) in pending.items():
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                with open(path, "w", encoding="utf-8", newline="") as fh:
                    fh.write(session.outputs[path])
            except OSError as exc:
                raise ScriptIOError(index, cmd, f"cannot write {path}: {exc}") from exc
    return session


def run_script(path, data_dir=None, out_dir=None) -> AnalysisSession:
    """Parse and execute the script at ``path``; relative files resolve next to it by default."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    base = path.parent
    return execute(parse_script(text), data_dir=data_dir or base, out_dir=out_dir or base)
