"""Agent engine: the BDI reasoning cycle, intention execution and agent messaging.

One call to `Agent.reasoning_cycle` runs, in order: perceive (ACKs, then
percepts), mailbox ingestion, FIFO event selection, plan selection and
push, one body step of one intention, and the wake-up of intentions
suspended by `.wait`. Step failures become `-!g` events or discarded
intentions; they never raise out of a cycle.
"""

import itertools
import queue
import threading
from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, Iterator, List, Optional, Sequence, Set, Tuple

import structlog

from ..lib.asl_parser import (
    AchieveAsync,
    AchieveSync,
    Action,
    AgentProgram,
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
from ..lib.bridge import (
    ActionTimeout,
    BridgeEndpoint,
    BridgeError,
    BridgeMode,
    EndpointDown,
    MalformedAction,
    UnknownAction,
)
from ..lib.terms import (
    EvaluationError,
    Term,
    add_annot,
    apply,
    eval_relation,
    format_term,
    fresh_suffix,
    functor_of,
    is_ground,
    rename_variables,
    source_annot,
    unify,
)
from ..models.cycle_report import AgentMetrics, CycleReport
from .belief_base import (
    DEFAULT_MAX_DEPTH,
    BeliefBase,
    BeliefBaseError,
    BeliefChange,
    ChangeKind,
    UniquenessPattern,
)
from .intentions import (
    PERCEPT_SOURCE,
    SELF_SOURCE,
    Event,
    Frame,
    Intention,
    IntentionStatus,
    StepFailure,
    describe_step,
    goal_trigger,
    trigger_matches,
)
from .internal_actions import run_internal_action

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class MessageEnvelope:
    sender: str
    receiver: str
    performative: str
    content: Term

    def __str__(self) -> str:
        return f"{self.sender} -> {self.receiver}: {self.performative} {format_term(self.content)}"


class AgentRegistry:
    """Name lookup for agents and the count of agent-to-agent messages."""

    def __init__(self):
        self._agents: Dict[str, "Agent"] = {}
        self._lock = threading.Lock()
        self.internal_messages = 0
        self.delivered: List[MessageEnvelope] = []

    def register(self, agent: "Agent") -> None:
        with self._lock:
            if agent.name in self._agents:
                raise ValueError(f"agent '{agent.name}' already registered")
            self._agents[agent.name] = agent

    def get(self, name: str) -> Optional["Agent"]:
        with self._lock:
            return self._agents.get(name)

    @property
    def names(self) -> List[str]:
        with self._lock:
            return list(self._agents)

    def __contains__(self, name: str) -> bool:
        return self.get(name) is not None

    def __len__(self) -> int:
        with self._lock:
            return len(self._agents)

    def _record(self, message: MessageEnvelope) -> None:
        with self._lock:
            self.internal_messages += 1
            self.delivered.append(message)


def deliver_message(message: MessageEnvelope, registry: AgentRegistry) -> bool:
    """Append a message to its receiver's mailbox; unknown receivers drop it."""
    receiver = registry.get(message.receiver)
    if receiver is None:
        logger.error(
            "Unknown message receiver",
            sender=message.sender,
            receiver=message.receiver,
            content=format_term(message.content),
        )
        return False
    receiver.mailbox.put(message)
    registry._record(message)
    return True


class Agent:
    """AgentSpeak agent state plus its reasoning cycle."""

    def __init__(
        self,
        name: str,
        program: AgentProgram,
        endpoint: Optional[BridgeEndpoint] = None,
        registry: Optional[AgentRegistry] = None,
        uniqueness_patterns: Sequence[str] = (),
        max_depth: int = DEFAULT_MAX_DEPTH,
        check_uniqueness: bool = True,
    ):
        self.name = name
        self.program = program
        self.endpoint = endpoint
        self.registry = registry
        self.beliefs = BeliefBase(
            program.rules,
            [UniquenessPattern.parse(text) for text in uniqueness_patterns],
            max_depth=max_depth,
        )
        self.plans: List[Plan] = list(program.plans)
        self.events: Deque[Event] = deque()
        self.intentions: Deque[Intention] = deque()
        self.mailbox: "queue.Queue[MessageEnvelope]" = queue.Queue()
        self.check_uniqueness = check_uniqueness

        self.cycle = 0
        self.now_ms = 0
        self.event_seq = 0
        self.halted = False
        self.metrics = AgentMetrics(agent=name)

        self._relevant: Set[Tuple[Polarity, TriggerKind, str, int]] = {
            (plan.trigger.polarity, plan.trigger.kind) + functor_of(plan.trigger.term)
            for plan in self.plans
        }
        self._intention_ids = itertools.count(1)
        self._observed: List[Event] = []
        self._actions_sent = 0
        self._internal_sent = 0

        for belief in program.initial_beliefs:
            self.beliefs.add_belief(add_annot(belief, source_annot(SELF_SOURCE)))
        for goal in program.initial_goals:
            self._post(Event(goal_trigger(goal), SELF_SOURCE))

        if registry is not None:
            registry.register(self)

    # events

    def is_relevant(self, trigger: TriggerEvent) -> bool:
        return (trigger.polarity, trigger.kind) + functor_of(trigger.term) in self._relevant

    def _observe(self, event: Event) -> Event:
        self.event_seq += 1
        event.seq = self.event_seq
        self._observed.append(event)
        return event

    def _post(self, event: Event) -> None:
        self.events.append(self._observe(event))

    def apply_belief_changes(self, changes: Sequence[BeliefChange], source: str = SELF_SOURCE) -> None:
        """Turn belief-base changes into events; only relevant ones are queued."""
        for change in changes:
            trigger = TriggerEvent(Polarity(change.kind.value), TriggerKind.BELIEF, change.belief)
            event = self._observe(Event(trigger, source))
            if self.is_relevant(trigger):
                self.events.append(event)

    def select_event(self) -> Optional[Event]:
        return self.events.popleft() if self.events else None

    # plan selection

    def _applicable(self, event: Event) -> Iterator[Tuple[int, Plan, Dict[str, Term]]]:
        for index, plan in enumerate(self.plans):
            unifier = trigger_matches(plan.trigger, event.trigger)
            if unifier is None:
                continue
            if plan.context is None:
                yield index, plan, unifier
                continue
            try:
                answer = next(self.beliefs.query(plan.context, unifier), None)
            except (EvaluationError, BeliefBaseError) as e:
                logger.debug("Context not evaluable", agent=self.name, plan=str(plan.trigger), error=str(e))
                continue
            if answer is not None:
                yield index, plan, answer

    def applicable_plans(self, event: Event) -> List[Tuple[Plan, Dict[str, Term]]]:
        """Relevant plans whose context holds, in source order, each with its first answer."""
        return [(plan, unifier) for _, plan, unifier in self._applicable(event)]

    def _handle_event(self, event: Event) -> Tuple[Optional[str], Optional[str]]:
        if event.intention is not None and event.intention not in self.intentions:
            return None, None

        chosen = next(self._applicable(event), None)
        if chosen is None:
            return None, self._no_applicable_plan(event)

        index, plan, unifier = chosen
        frame = Frame(plan, unifier, event.trigger, list(plan.body), index, event.return_goal)
        intention = event.intention
        if intention is None:
            intention = Intention(id=next(self._intention_ids))
        else:
            self.intentions.remove(intention)
        self.intentions.append(intention)
        intention.push(frame)
        return f"#{index + 1} {plan.trigger}", None

    def _no_applicable_plan(self, event: Event) -> Optional[str]:
        trigger = event.trigger
        if trigger.kind is not TriggerKind.ACHIEVE:
            return None

        reason = f"no applicable plan for {trigger}"
        if trigger.polarity is Polarity.ADD:
            failure = goal_trigger(trigger.term, Polarity.DELETE)
            if self.is_relevant(failure):
                logger.debug("Goal failed", agent=self.name, goal=str(trigger))
                self._post(Event(failure, SELF_SOURCE, intention=event.intention))
                return reason

        if event.intention is not None:
            self._discard(event.intention, reason)
        else:
            logger.warning("Goal dropped", agent=self.name, reason=reason)
        return reason

    # intentions

    def _discard(self, intention: Intention, reason: str) -> None:
        if intention in self.intentions:
            self.intentions.remove(intention)
        logger.warning("Intention discarded", agent=self.name, intention=intention.id, reason=reason)

    def _fail(self, intention: Intention, reason: str) -> None:
        """Drop frames down to the innermost `+!g` plan and post `-!g`."""
        frames = intention.frames
        goal_index = None
        for index in range(len(frames) - 1, -1, -1):
            if frames[index].is_failure_plan:
                self._discard(intention, f"failure while handling failure: {reason}")
                return
            if frames[index].is_goal_plan:
                goal_index = index
                break
        if goal_index is None:
            self._discard(intention, reason)
            return

        goal = frames[goal_index].trigger.term
        failure = goal_trigger(goal, Polarity.DELETE)
        if not self.is_relevant(failure):
            self._discard(intention, f"{reason}; no plan for {failure}")
            return

        del frames[goal_index:]
        if frames:
            intention.status = IntentionStatus.AWAITING_SUBGOAL
            self._post(Event(failure, SELF_SOURCE, intention=intention))
        else:
            self.intentions.remove(intention)
            self._post(Event(failure, SELF_SOURCE))

    def drop_all_desires(self, keep: Optional[Intention] = None) -> None:
        self.events.clear()
        self.intentions = deque(i for i in self.intentions if i is keep)

    def _select_intention(self) -> Optional[Intention]:
        """Round-robin: take the first runnable intention from the head, then move it to the back."""
        for _ in range(len(self.intentions)):
            candidate = self.intentions[0]
            self.intentions.rotate(-1)
            if candidate.runnable:
                return candidate
        return None

    def _pop_finished(self, intention: Intention) -> None:
        while intention.status is IntentionStatus.ACTIVE and intention.top is not None and not intention.top.body:
            done = intention.frames.pop()
            caller = intention.top
            if caller is not None and done.return_goal is not None:
                result = apply(done.trigger.term, done.unifier)
                bound = unify(done.return_goal, result, caller.unifier)
                if bound is not None:
                    caller.unifier = bound
        if intention.finished and intention in self.intentions:
            self.intentions.remove(intention)

    # steps

    def execute_step(self, intention: Intention) -> Tuple[Optional[str], Optional[str]]:
        """Run the next body step of intention; returns (step text, failure reason)."""
        self._pop_finished(intention)
        frame = intention.top
        if frame is None or not intention.runnable:
            return None, None

        step = frame.body.pop(0)
        text = describe_step(step, frame.unifier)
        try:
            self._run_step(step, frame, intention)
        except StepFailure as e:
            logger.debug("Step failed", agent=self.name, step=text, reason=e.reason)
            self._fail(intention, f"{text}: {e.reason}")
            return text, e.reason
        self._pop_finished(intention)
        return text, None

    def _run_step(self, step: BodyStep, frame: Frame, intention: Intention) -> None:
        s = frame.unifier

        if isinstance(step, Action):
            self._act(apply(step.term, s), intention)

        elif isinstance(step, InternalAction):
            frame.unifier = run_internal_action(self, intention, step.name, step.args, s)

        elif isinstance(step, (AchieveSync, AchieveAsync)):
            goal = apply(step.goal, s)
            renamed = rename_variables(goal, fresh_suffix(), {})
            if isinstance(step, AchieveSync):
                intention.status = IntentionStatus.AWAITING_SUBGOAL
                self._post(Event(goal_trigger(renamed), SELF_SOURCE, intention=intention, return_goal=goal))
            else:
                self._post(Event(goal_trigger(renamed), SELF_SOURCE))

        elif isinstance(step, TestGoal):
            try:
                answer = next(self.beliefs.query_literal(step.goal, s), None)
            except (EvaluationError, BeliefBaseError) as e:
                raise StepFailure(str(e)) from e
            if answer is None:
                raise StepFailure("test goal has no answer")
            frame.unifier = answer

        elif isinstance(step, BeliefAdd):
            self.apply_belief_changes(self._add(apply(step.term, s)))

        elif isinstance(step, BeliefDelete):
            removed = self.beliefs.remove_belief(apply(step.term, s), s)
            if removed is not None:
                belief, frame.unifier = removed
                self.apply_belief_changes([BeliefChange(ChangeKind.DELETE, belief)])

        elif isinstance(step, BeliefReplace):
            term = self._own_belief(apply(step.term, s))
            self.apply_belief_changes(self.beliefs.replace_belief(term))

        elif isinstance(step, RelationalStep):
            try:
                result = eval_relation(step.op, step.left, step.right, s)
            except EvaluationError as e:
                raise StepFailure(str(e)) from e
            if result is None:
                raise StepFailure("relation does not hold")
            frame.unifier = result

        else:
            raise StepFailure(f"unsupported step {step!r}")

    @staticmethod
    def _own_belief(term: Term) -> Term:
        if not is_ground(term):
            raise StepFailure(f"belief {format_term(term)} is not ground")
        return add_annot(term, source_annot(SELF_SOURCE))

    def _add(self, term: Term) -> List[BeliefChange]:
        return self.beliefs.add_belief(self._own_belief(term))

    def _act(self, action: Term, intention: Intention) -> None:
        if self.endpoint is None:
            raise StepFailure("no robot connected")
        if not is_ground(action):
            raise StepFailure(f"action {format_term(action)} is not ground")
        try:
            outcome = self.endpoint.act(action, self.now_ms)
        except (UnknownAction, MalformedAction, EndpointDown) as e:
            raise StepFailure(str(e)) from e
        self._actions_sent += 1

        if self.endpoint.exited:
            self.halted = True
            logger.info("Agent exited", agent=self.name, cycle=self.cycle)
        elif self.endpoint.mode is BridgeMode.SYNC:
            intention.status = IntentionStatus.AWAITING_ACK
            intention.pending_action = outcome

    # messaging

    def send_message(self, receiver: str, performative: str, content: Term) -> bool:
        message = MessageEnvelope(self.name, receiver, performative, content)
        if self.registry is None:
            logger.error("Unknown message receiver", sender=self.name, receiver=receiver, reason="no registry")
            return False
        delivered = deliver_message(message, self.registry)
        if delivered:
            self._internal_sent += 1
        return delivered

    def _read_mailbox(self) -> List[str]:
        """Ingest every waiting message; returns each as `performative belief[source(sender)]`."""
        received: List[str] = []
        while True:
            try:
                message = self.mailbox.get_nowait()
            except queue.Empty:
                return received
            content = add_annot(message.content, source_annot(message.sender))
            received.append(f"{message.performative} {format_term(content)}")
            if message.performative == "untell":
                removed = self.beliefs.remove_belief(content)
                if removed is not None:
                    self.apply_belief_changes([BeliefChange(ChangeKind.DELETE, removed[0])], message.sender)
                continue
            try:
                self.apply_belief_changes(self.beliefs.add_belief(content), message.sender)
            except BeliefBaseError as e:
                logger.warning("Message ignored", agent=self.name, sender=message.sender, error=str(e))

    # perception

    def ready(self, now_ms: int) -> bool:
        """Whether the harness may grant a cycle now (sync mode waits for percepts and ACKs)."""
        if self.halted:
            return False
        if self.endpoint is None or self.endpoint.mode is BridgeMode.ASYNC:
            return True
        return self.endpoint.percepts_waiting and self.endpoint.has_settleable(now_ms)

    def _settle_actions(self) -> int:
        if self.endpoint is None:
            return 0
        settled = self.endpoint.resolve(self.now_ms)
        for outcome in settled:
            waiting = next((i for i in self.intentions if i.pending_action is outcome), None)
            if waiting is None:
                continue
            waiting.resume()
            try:
                outcome.raise_for_status()
            except ActionTimeout as e:
                logger.warning("Action timed out", agent=self.name, action=outcome.action, cycle=self.cycle)
                self._fail(waiting, str(e))
            except BridgeError as e:
                self._fail(waiting, str(e))
        return len(settled)

    def _perceive(self) -> int:
        if self.endpoint is None:
            return 0
        try:
            percepts = self.endpoint.perceive(block=False)
        except EndpointDown as e:
            self.halted = True
            logger.warning("Bridge down, agent halted", agent=self.name, cycle=self.cycle, error=str(e))
            return 0
        for percept in percepts:
            self.apply_belief_changes(self.beliefs.add_belief(percept), PERCEPT_SOURCE)
        return len(percepts)

    def _wake(self) -> int:
        woken = 0
        for intention in self.intentions:
            if intention.status is IntentionStatus.WAITING_EVENT:
                if any(
                    event.seq > intention.wait_since
                    and trigger_matches(intention.wait_pattern, event.trigger) is not None
                    for event in self._observed
                ):
                    intention.resume()
                    woken += 1
            elif intention.status is IntentionStatus.SLEEPING and self.now_ms >= intention.wake_at_ms:
                intention.resume()
                woken += 1
        return woken

    # the cycle

    def reasoning_cycle(self, now_ms: Optional[int] = None) -> CycleReport:
        if now_ms is not None:
            self.now_ms = now_ms
        self._observed = []
        self._actions_sent = 0
        self._internal_sent = 0

        queue_empty = self.endpoint is None or not self.endpoint.percepts_waiting
        acks = self._settle_actions()
        percepts = self._perceive()
        received = self._read_mailbox()

        event = self.select_event()
        plan_text, failure = None, None
        if event is not None:
            plan_text, failure = self._handle_event(event)

        step_text, step_failure = None, None
        intention = None if self.halted else self._select_intention()
        if intention is not None:
            step_text, step_failure = self.execute_step(intention)

        woken = self._wake()
        self.cycle += 1

        unique_ok = True
        if self.check_uniqueness:
            unique_ok = not self.beliefs.uniqueness_violations()

        report = CycleReport(
            agent=self.name,
            cycle=self.cycle,
            time_ms=self.now_ms,
            percepts=percepts,
            percept_queue_empty=queue_empty,
            acks=acks,
            messages=len(received),
            received=received,
            event=str(event) if event is not None else None,
            plan=plan_text,
            intention=intention.id if intention is not None and step_text is not None else None,
            step=step_text,
            failure=step_failure or failure,
            actions_sent=self._actions_sent,
            internal_sent=self._internal_sent,
            woken=woken,
            events_queued=len(self.events),
            intentions=len(self.intentions),
            unique_ok=unique_ok,
            halted=self.halted,
        )
        self.metrics.record(report)
        return report

    def snapshot(self) -> Dict[str, object]:
        return {
            "agent": self.name,
            "cycle": self.cycle,
            "beliefs": self.beliefs.snapshot(),
            "events": [str(e) for e in self.events],
            "intentions": [str(i) for i in self.intentions],
            "halted": self.halted,
        }
