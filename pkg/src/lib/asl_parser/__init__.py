"""
Agent Source and Project File Parsing.

This library turns agent programs (beliefs, rules, initial goals, plans)
and project files (agents bound to NXT bricks) into in-memory structures
the reasoning engine runs.

Classes:
    AgentProgram: Parsed agent program in source order
    Plan, TriggerEvent: Plan library entries and their triggering events
    AslSyntaxError: Syntax error with line, column and offending token
    ProjectFileError: Project file error naming agent and field

Features:
    - `//` and `/* */` comments anywhere
    - Annotated literals such as `light(_, X)[source(percept)]`
    - `-+b` parsed as a single belief replacement step
    - `.wait("+light(_,_)")` patterns kept verbatim and parsed on demand
    - Round-trip printing: parse(print(parse(src))) == parse(src)
"""

import logging

from .ast import (
    AchieveAsync,
    AchieveSync,
    Action,
    AgentProgram,
    And,
    BeliefAdd,
    BeliefDelete,
    BeliefReplace,
    BodyStep,
    ContextFormula,
    InternalAction,
    Literal,
    Not,
    Plan,
    Polarity,
    Relation,
    RelationalStep,
    Rule,
    TestGoal,
    TriggerEvent,
    TriggerKind,
    Truth,
)
from .lexer import AslSyntaxError, tokenize
from .parser import parse_agent_program, parse_context, parse_term, parse_trigger
from .printer import format_plan, roundtrip_print
from .project_file import ProjectFileError, load_project_file, parse_project_file

logger = logging.getLogger(__name__)

__all__ = [
    "AchieveAsync",
    "AchieveSync",
    "Action",
    "AgentProgram",
    "And",
    "AslSyntaxError",
    "BeliefAdd",
    "BeliefDelete",
    "BeliefReplace",
    "BodyStep",
    "ContextFormula",
    "InternalAction",
    "Literal",
    "Not",
    "Plan",
    "Polarity",
    "ProjectFileError",
    "Relation",
    "RelationalStep",
    "Rule",
    "TestGoal",
    "TriggerEvent",
    "TriggerKind",
    "Truth",
    "format_plan",
    "load_project_file",
    "parse_agent_program",
    "parse_context",
    "parse_project_file",
    "parse_term",
    "parse_trigger",
    "roundtrip_print",
    "tokenize",
]
