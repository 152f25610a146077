"""Program structures produced by the agent-source parser."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple, Union

from ..terms import Term, format_term


class Polarity(str, Enum):
    ADD = "+"
    DELETE = "-"


class TriggerKind(str, Enum):
    BELIEF = "belief"
    ACHIEVE = "achieve"


@dataclass(frozen=True)
class TriggerEvent:
    polarity: Polarity
    kind: TriggerKind
    term: Term

    def __str__(self) -> str:
        bang = "!" if self.kind is TriggerKind.ACHIEVE else ""
        return f"{self.polarity.value}{bang}{format_term(self.term)}"


# Context formulas

@dataclass(frozen=True)
class Truth:
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class Literal:
    term: Term

    def __str__(self) -> str:
        return format_term(self.term)


@dataclass(frozen=True)
class Relation:
    op: str
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{format_term(self.left)} {self.op} {format_term(self.right)}"


@dataclass(frozen=True)
class Not:
    formula: "ContextFormula"

    def __str__(self) -> str:
        if isinstance(self.formula, (Literal, Truth)):
            return f"not {self.formula}"
        return f"not ({self.formula})"


@dataclass(frozen=True)
class And:
    parts: Tuple["ContextFormula", ...]

    def __str__(self) -> str:
        rendered = []
        for part in self.parts:
            text = str(part)
            rendered.append(f"({text})" if isinstance(part, And) else text)
        return " & ".join(rendered)


ContextFormula = Union[Truth, Literal, Relation, Not, And]


# Body steps

@dataclass(frozen=True)
class Action:
    term: Term

    def __str__(self) -> str:
        return format_term(self.term)


@dataclass(frozen=True)
class InternalAction:
    name: str
    args: Tuple[Term, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return f".{self.name}"
        return f".{self.name}(" + ", ".join(format_term(a) for a in self.args) + ")"


@dataclass(frozen=True)
class AchieveSync:
    goal: Term

    def __str__(self) -> str:
        return f"!{format_term(self.goal)}"


@dataclass(frozen=True)
class AchieveAsync:
    goal: Term

    def __str__(self) -> str:
        return f"!!{format_term(self.goal)}"


@dataclass(frozen=True)
class TestGoal:
    __test__ = False

    goal: Term

    def __str__(self) -> str:
        return f"?{format_term(self.goal)}"


@dataclass(frozen=True)
class BeliefAdd:
    term: Term

    def __str__(self) -> str:
        return f"+{format_term(self.term)}"


@dataclass(frozen=True)
class BeliefDelete:
    term: Term

    def __str__(self) -> str:
        return f"-{format_term(self.term)}"


@dataclass(frozen=True)
class BeliefReplace:
    term: Term

    def __str__(self) -> str:
        return f"-+{format_term(self.term)}"


@dataclass(frozen=True)
class RelationalStep:
    op: str
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{format_term(self.left)} {self.op} {format_term(self.right)}"


BodyStep = Union[
    Action,
    InternalAction,
    AchieveSync,
    AchieveAsync,
    TestGoal,
    BeliefAdd,
    BeliefDelete,
    BeliefReplace,
    RelationalStep,
]


@dataclass(frozen=True)
class Rule:
    head: Term
    body: ContextFormula

    def __str__(self) -> str:
        return f"{format_term(self.head)} :- {self.body}."


@dataclass(frozen=True)
class Plan:
    trigger: TriggerEvent
    context: Optional[ContextFormula] = None
    body: Tuple[BodyStep, ...] = ()

    def __str__(self) -> str:
        text = str(self.trigger)
        if self.context is not None:
            text += f" : {self.context}"
        if self.body:
            text += " <- " + "; ".join(str(step) for step in self.body)
        return text + "."


@dataclass
class AgentProgram:
    initial_beliefs: List[Term] = field(default_factory=list)
    rules: List[Rule] = field(default_factory=list)
    initial_goals: List[Term] = field(default_factory=list)
    plans: List[Plan] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "beliefs": len(self.initial_beliefs),
            "rules": len(self.rules),
            "goals": len(self.initial_goals),
            "plans": len(self.plans),
        }
