"""Render an AgentProgram back to agent-source text."""

from __future__ import annotations

from typing import List

from ..terms import format_term
from .ast import AgentProgram, Plan


def format_plan(plan: Plan, multiline: bool = False) -> str:
    if not multiline or len(plan.body) < 2:
        return str(plan)
    head = str(plan.trigger)
    if plan.context is not None:
        head += f" : {plan.context}"
    steps = ";\n    ".join(str(step) for step in plan.body)
    return f"{head}\n    <- {steps}."


def roundtrip_print(program: AgentProgram, multiline: bool = False) -> str:
    """Print a program so that parsing the result yields an equal structure.

    Sections appear in the conventional order: beliefs, rules, goals, plans.
    An empty program prints as the empty string.
    """
    lines: List[str] = []
    lines.extend(f"{format_term(belief)}." for belief in program.initial_beliefs)
    lines.extend(str(rule) for rule in program.rules)
    lines.extend(f"!{format_term(goal)}." for goal in program.initial_goals)
    lines.extend(format_plan(plan, multiline) for plan in program.plans)
    if not lines:
        return ""
    return "\n".join(lines) + "\n"
