"""Events, intention stacks and step descriptions for the reasoning cycle."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

from ..lib.asl_parser import (
    AchieveAsync,
    AchieveSync,
    Action,
    BeliefAdd,
    BeliefDelete,
    BeliefReplace,
    BodyStep,
    InternalAction,
    Plan,
    Polarity,
    RelationalStep,
    TestGoal,
    TriggerEvent,
    TriggerKind,
)
from ..lib.bridge import ActionOutcome
from ..lib.terms import Substitution, Term, apply, format_term, unify, unify_annotations

SELF_SOURCE = "self"
PERCEPT_SOURCE = "percept"


class StepFailure(Exception):
    """A body step could not be completed; handled as goal failure, never raised out of a cycle."""

    def __init__(self, reason: str, step: Optional[BodyStep] = None):
        self.reason = reason
        self.step = step
        super().__init__(reason)


class IntentionStatus(str, Enum):
    ACTIVE = "active"
    AWAITING_SUBGOAL = "awaiting_subgoal"
    WAITING_EVENT = "waiting_event"
    SLEEPING = "sleeping"
    AWAITING_ACK = "awaiting_ack"


@dataclass
class Event:
    trigger: TriggerEvent
    source: str = SELF_SOURCE
    intention: Optional["Intention"] = None
    seq: int = 0
    return_goal: Optional[Term] = None

    def __str__(self) -> str:
        return str(self.trigger)


@dataclass
class Frame:
    """One plan instance on an intention stack."""
    plan: Plan
    unifier: Substitution
    trigger: TriggerEvent
    body: List[BodyStep]
    plan_index: int = 0
    return_goal: Optional[Term] = None

    @property
    def is_goal_plan(self) -> bool:
        return self.trigger.kind is TriggerKind.ACHIEVE and self.trigger.polarity is Polarity.ADD

    @property
    def is_failure_plan(self) -> bool:
        return self.trigger.kind is TriggerKind.ACHIEVE and self.trigger.polarity is Polarity.DELETE


@dataclass
class Intention:
    frames: List[Frame] = field(default_factory=list)
    status: IntentionStatus = IntentionStatus.ACTIVE
    id: int = 0
    wait_pattern: Optional[TriggerEvent] = None
    wait_since: int = 0
    wake_at_ms: Optional[int] = None
    pending_action: Optional[ActionOutcome] = None

    @property
    def top(self) -> Optional[Frame]:
        return self.frames[-1] if self.frames else None

    @property
    def finished(self) -> bool:
        return not self.frames

    @property
    def runnable(self) -> bool:
        return self.status is IntentionStatus.ACTIVE and bool(self.frames)

    def push(self, frame: Frame) -> None:
        self.frames.append(frame)
        self.status = IntentionStatus.ACTIVE

    def suspend_until(self, pattern: TriggerEvent, since: int) -> None:
        self.status = IntentionStatus.WAITING_EVENT
        self.wait_pattern = pattern
        self.wait_since = since

    def sleep_until(self, wake_at_ms: int) -> None:
        self.status = IntentionStatus.SLEEPING
        self.wake_at_ms = wake_at_ms

    def resume(self) -> None:
        self.status = IntentionStatus.ACTIVE
        self.wait_pattern = None
        self.wake_at_ms = None
        self.pending_action = None

    def __str__(self) -> str:
        goals = " / ".join(str(frame.trigger) for frame in self.frames)
        return f"intention {self.id} [{self.status.value}] {goals}"


def trigger_matches(pattern: TriggerEvent, trigger: TriggerEvent, s: Optional[Substitution] = None) -> Optional[Substitution]:
    """Unify a plan or wait trigger with an event; pattern annotations must all be present."""
    if pattern.polarity is not trigger.polarity or pattern.kind is not trigger.kind:
        return None
    unifier = unify(pattern.term, trigger.term, s or {})
    if unifier is None:
        return None
    return unify_annotations(pattern.term, trigger.term, unifier)


def describe_step(step: BodyStep, s: Substitution) -> str:
    """Render a body step with the frame's bindings applied."""
    if isinstance(step, Action):
        return format_term(apply(step.term, s))
    if isinstance(step, InternalAction):
        return str(InternalAction(step.name, tuple(apply(arg, s) for arg in step.args)))
    if isinstance(step, AchieveSync):
        return str(AchieveSync(apply(step.goal, s)))
    if isinstance(step, AchieveAsync):
        return str(AchieveAsync(apply(step.goal, s)))
    if isinstance(step, TestGoal):
        return str(TestGoal(apply(step.goal, s)))
    if isinstance(step, BeliefAdd):
        return str(BeliefAdd(apply(step.term, s)))
    if isinstance(step, BeliefDelete):
        return str(BeliefDelete(apply(step.term, s)))
    if isinstance(step, BeliefReplace):
        return str(BeliefReplace(apply(step.term, s)))
    if isinstance(step, RelationalStep):
        return str(RelationalStep(step.op, apply(step.left, s), apply(step.right, s)))
    return str(step)


def goal_trigger(goal: Term, polarity: Polarity = Polarity.ADD) -> TriggerEvent:
    return TriggerEvent(polarity, TriggerKind.ACHIEVE, goal)

