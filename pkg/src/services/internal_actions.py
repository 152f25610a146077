"""Built-in `.name(...)` actions executed inside the engine."""

from __future__ import annotations

from typing import TYPE_CHECKING, Callable, Dict, Optional, Sequence

import structlog

from ..lib.asl_parser import AslSyntaxError, parse_trigger
from ..lib.terms import Atom, Number, StringTerm, Substitution, Term, apply, format_term, is_ground
from .intentions import Intention, StepFailure

if TYPE_CHECKING:
    from .engine import Agent

logger = structlog.get_logger(__name__)

InternalActionFn = Callable[["Agent", Intention, Sequence[Term], Substitution], Optional[Substitution]]

INTERNAL_ACTIONS: Dict[str, InternalActionFn] = {}

SUPPORTED_PERFORMATIVES = ("tell", "untell")
RECOGNISED_PERFORMATIVES = ("tell", "untell", "tellHow", "achieve", "askOne")


def internal_action(name: str, arity: Optional[int] = None):
    """Register a function as the internal action `.name`."""

    def decorator(fn: InternalActionFn) -> InternalActionFn:
        def checked(agent, intention, args, s):
            if arity is not None and len(args) != arity:
                raise StepFailure(f".{name} expects {arity} argument(s), got {len(args)}")
            return fn(agent, intention, args, s)

        checked.__name__ = fn.__name__
        checked.__doc__ = fn.__doc__
        INTERNAL_ACTIONS[name] = checked
        return checked

    return decorator


def run_internal_action(agent: "Agent", intention: Intention, name: str, args: Sequence[Term], s: Substitution) -> Substitution:
    """Execute `.name(args)`; returns the (possibly extended) unifier or raises StepFailure."""
    action = INTERNAL_ACTIONS.get(name)
    if action is None:
        raise StepFailure(f"unknown internal action .{name}")
    result = action(agent, intention, [apply(arg, s) for arg in args], s)
    return s if result is None else result


@internal_action("send", arity=3)
def send(agent: "Agent", intention: Intention, args: Sequence[Term], s: Substitution) -> None:
    """`.send(receiver, performative, content)` through the agent registry."""
    receiver, performative, content = args
    if not isinstance(receiver, Atom):
        raise StepFailure(f".send receiver must be an agent name, got {format_term(receiver)}")
    if not isinstance(performative, Atom) or performative.name not in RECOGNISED_PERFORMATIVES:
        raise StepFailure(f".send: unknown performative {format_term(performative)}")
    if performative.name not in SUPPORTED_PERFORMATIVES:
        raise StepFailure(f".send: performative {performative.name} is not supported")
    if not is_ground(content):
        raise StepFailure(f".send content must be ground, got {format_term(content)}")
    agent.send_message(receiver.name, performative.name, content)


@internal_action("wait", arity=1)
def wait(agent: "Agent", intention: Intention, args: Sequence[Term], s: Substitution) -> None:
    """`.wait("+trigger")` suspends until a later matching event; `.wait(ms)` sleeps."""
    (arg,) = args
    if isinstance(arg, Number):
        if arg.value < 0:
            raise StepFailure(".wait needs a non-negative time")
        intention.sleep_until(agent.now_ms + int(arg.value))
        return
    if not isinstance(arg, StringTerm):
        raise StepFailure(f".wait expects a trigger string or a time, got {format_term(arg)}")
    try:
        pattern = parse_trigger(arg.value)
    except AslSyntaxError as e:
        raise StepFailure(f".wait: bad trigger {arg.value!r}: {e}") from e
    intention.suspend_until(pattern, agent.event_seq)


@internal_action("drop_all_desires", arity=0)
def drop_all_desires(agent: "Agent", intention: Intention, args: Sequence[Term], s: Substitution) -> None:
    """Clear pending events and every intention except the running one."""
    agent.drop_all_desires(keep=intention)


@internal_action("abolish", arity=1)
def abolish(agent: "Agent", intention: Intention, args: Sequence[Term], s: Substitution) -> None:
    (pattern,) = args
    agent.apply_belief_changes(agent.beliefs.abolish_changes(pattern))


@internal_action("print")
def print_(agent: "Agent", intention: Intention, args: Sequence[Term], s: Substitution) -> None:
    text = "".join(arg.value if isinstance(arg, StringTerm) else format_term(arg) for arg in args)
    logger.info("Agent says", agent=agent.name, text=text)
