"""Parser for project files listing agents and the robots they drive.

Accepted shape, one block per agent:

    agentname agentsource.asl
        [btname="NXT", btaddress="12:34:56:78:90:AB",
         motora="t", motorb="t", motorc="f",
         sensor1="light", sensor2="none", sensor3="none", sensor4="none",
         sleep="50"]
        agentArchClass arch.LEGOAgArchitecture
        beliefBaseClass agent.UniqueBelsBB("light(port,_)","sound(port,_)");
"""

from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pydantic import ValidationError

from ...models.project_config import (
    BTADDRESS_PATTERN,
    MOTOR_PORTS,
    SENSOR_PORTS,
    AgentConfig,
    ProjectConfig,
    SensorKind,
)

logger = logging.getLogger(__name__)


MANDATORY_KEYS = (
    "btname", "btaddress",
    "motora", "motorb", "motorc",
    "sensor1", "sensor2", "sensor3", "sensor4",
)
OPTIONAL_KEYS = ("sleep",)

_TRUE_VALUES = ("t", "true")
_FALSE_VALUES = ("f", "false")

_TOKEN_RE = re.compile(
    r"""
    (?P<newline>\n)
  | (?P<space>[ \t\r\f\v]+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<word>[A-Za-z_][A-Za-z0-9_.\-/]*)
  | (?P<number>[0-9]+)
  | (?P<punct>[\[\](),=;])
    """,
    re.VERBOSE | re.DOTALL,
)


class ProjectFileError(Exception):
    """Project file problem, located by agent and field where possible."""

    def __init__(
        self,
        message: str,
        agent: Optional[str] = None,
        field: Optional[str] = None,
        line: Optional[int] = None,
    ):
        self.message = message
        self.agent = agent
        self.field = field
        self.line = line
        super().__init__(str(self))

    def __str__(self) -> str:
        where = []
        if self.agent:
            where.append(f"agent '{self.agent}'")
        if self.field:
            where.append(f"field '{self.field}'")
        if self.line is not None:
            where.append(f"line {self.line}")
        prefix = ", ".join(where)
        return f"{prefix}: {self.message}" if prefix else self.message


_Token = Tuple[str, str, int]


def _tokenize(source: str) -> List[_Token]:
    tokens: List[_Token] = []
    line = 1
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ProjectFileError(f"unexpected character {source[pos]!r}", line=line)
        kind = match.lastgroup or ""
        text = match.group()
        if kind == "string":
            tokens.append((kind, bytes(text[1:-1], "utf-8").decode("unicode_escape"), line))
        elif kind in ("word", "number", "punct"):
            tokens.append((kind, text, line))
        line += text.count("\n")
        pos = match.end()
    return tokens


class _ProjectParser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.agent: Optional[str] = None

    def _peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _line(self) -> Optional[int]:
        token = self._peek()
        return token[2] if token else (self.tokens[-1][2] if self.tokens else None)

    def _next(self, kind: str, text: Optional[str] = None) -> str:
        token = self._peek()
        wanted = f"'{text}'" if text else kind
        if token is None:
            raise ProjectFileError(f"expected {wanted}, found end of file", agent=self.agent, line=self._line())
        if token[0] != kind or (text is not None and token[1] != text):
            raise ProjectFileError(f"expected {wanted}, found '{token[1]}'", agent=self.agent, line=token[2])
        self.pos += 1
        return token[1]

    def _accept(self, kind: str, text: Optional[str] = None) -> bool:
        token = self._peek()
        if token is not None and token[0] == kind and (text is None or token[1] == text):
            self.pos += 1
            return True
        return False

    def parse(self) -> List[AgentConfig]:
        agents: List[AgentConfig] = []
        while self._peek() is not None:
            agents.append(self._parse_block())
            self.agent = None
        return agents

    def _parse_block(self) -> AgentConfig:
        name = self._next("word")
        self.agent = name
        source_path = self._next("word")
        self._next("punct", "[")
        params: Dict[str, str] = {}
        while True:
            key_line = self._line()
            key = self._next("word")
            self._next("punct", "=")
            token = self._peek()
            if token is not None and token[0] == "number":
                value = self._next("number")
            else:
                value = self._next("string")
            if key in params:
                raise ProjectFileError("duplicate key", agent=name, field=key, line=key_line)
            params[key] = value
            if self._accept("punct", "]"):
                break
            self._next("punct", ",")

        arch_class: Optional[str] = None
        belief_base_class: Optional[str] = None
        patterns: List[str] = []
        if self._accept("word", "agentArchClass"):
            arch_class = self._next("word")
        if self._accept("word", "beliefBaseClass"):
            belief_base_class = self._next("word")
            if self._accept("punct", "("):
                patterns.append(self._next("string"))
                while self._accept("punct", ","):
                    patterns.append(self._next("string"))
                self._next("punct", ")")
        self._accept("punct", ";")

        return _build_agent(name, source_path, params, arch_class, belief_base_class, patterns)


def _parse_flag(agent: str, key: str, value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in _TRUE_VALUES:
        return True
    if lowered in _FALSE_VALUES:
        return False
    raise ProjectFileError(f"expected t/f or true/false, got '{value}'", agent=agent, field=key)


def _build_agent(
    name: str,
    source_path: str,
    params: Dict[str, str],
    arch_class: Optional[str],
    belief_base_class: Optional[str],
    patterns: List[str],
) -> AgentConfig:
    for key in params:
        if key not in MANDATORY_KEYS and key not in OPTIONAL_KEYS:
            raise ProjectFileError("unknown key", agent=name, field=key)
    for key in MANDATORY_KEYS:
        if key not in params:
            raise ProjectFileError("missing mandatory key", agent=name, field=key)

    if not BTADDRESS_PATTERN.match(params["btaddress"]):
        raise ProjectFileError(
            f"malformed btaddress '{params['btaddress']}', expected format 12:34:56:78:90:AB",
            agent=name,
            field="btaddress",
        )

    motors = {port: _parse_flag(name, f"motor{port}", params[f"motor{port}"]) for port in MOTOR_PORTS}

    sensors: Dict[int, SensorKind] = {}
    for port in SENSOR_PORTS:
        key = f"sensor{port}"
        value = params[key].strip().lower()
        try:
            sensors[port] = SensorKind(value)
        except ValueError:
            allowed = ", ".join(kind.value for kind in SensorKind)
            raise ProjectFileError(
                f"unknown sensor kind '{params[key]}' (expected one of {allowed})",
                agent=name,
                field=key,
            ) from None

    sleep_ms = 50
    if "sleep" in params:
        try:
            sleep_ms = int(params["sleep"])
        except ValueError:
            raise ProjectFileError(f"sleep must be an integer, got '{params['sleep']}'",
                                   agent=name, field="sleep") from None
        if sleep_ms < 1:
            raise ProjectFileError("sleep must be at least 1 ms", agent=name, field="sleep")

    if belief_base_class is None:
        logger.warning("Agent %s has no beliefBaseClass; percepts will accumulate", name)

    try:
        return AgentConfig(
            name=name,
            source_path=source_path,
            btname=params["btname"],
            btaddress=params["btaddress"],
            motors=motors,
            sensors=sensors,
            sleep_ms=sleep_ms,
            arch_class=arch_class,
            belief_base_class=belief_base_class,
            unique_patterns=patterns,
        )
    except ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(part) for part in first.get("loc", ())) or None
        raise ProjectFileError(first.get("msg", str(exc)), agent=name, field=field) from exc


def parse_project_file(source: str, base_dir: Optional[Union[str, Path]] = None) -> ProjectConfig:
    """Parse project-file text into a ProjectConfig."""
    agents = _ProjectParser(source).parse()
    try:
        project = ProjectConfig(agents=agents, base_dir=str(base_dir) if base_dir is not None else None)
    except ValidationError as exc:
        raise ProjectFileError(exc.errors()[0].get("msg", str(exc))) from exc
    except ValueError as exc:
        raise ProjectFileError(str(exc)) from exc
    logger.debug("Parsed project with %d agent(s)", len(project.agents))
    return project


def load_project_file(path: Union[str, Path]) -> ProjectConfig:
    """Read and parse a project file; sources resolve relative to its directory."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProjectFileError(f"cannot read project file {path}: {exc}") from exc
    return parse_project_file(text, base_dir=path.parent)
