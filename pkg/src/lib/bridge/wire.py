"""Wire records exchanged between an agent and its brick.

One ASCII line per message, fields separated by `|`:

    A|7|FWD|a,b|60,60      action 7: both motors forward at 60 deg/s
    P|LIGHT|1|360          percept: light sensor on port 1 read 360
    K|7                    action 7 acknowledged
    K|7|NAK|motor c        action 7 refused
    X                      shut the brick down
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple, Union

from ..terms import (
    Atom,
    ListTerm,
    Number,
    Structure,
    Term,
    functor_of,
    is_ground,
    source_annot,
    strip_annots,
)


class BridgeError(Exception):
    """Base error for the agent/brick bridge."""


class UnknownAction(BridgeError):
    """Action functor outside the brick vocabulary."""


class MalformedAction(BridgeError):
    """Action with wrong arity, argument types or mismatched list lengths."""


class MalformedPercept(BridgeError):
    """Percept record with an unknown kind or an out-of-range port or value."""


class EndpointDown(BridgeError):
    """Transport closed; the agent should halt."""


class ActionTimeout(BridgeError):
    """No acknowledgement arrived within the action timeout."""


class WireKind(str, Enum):
    ACTION = "A"
    PERCEPT = "P"
    ACK = "K"
    EXIT = "X"


class Verb(str, Enum):
    FWD = "FWD"
    BWD = "BWD"
    ROT = "ROT"
    REV = "REV"
    SPD = "SPD"
    STP = "STP"
    BLK = "BLK"


class PerceptKind(str, Enum):
    LIGHT = "LIGHT"
    OBSTACLE = "OBSTACLE"
    TOUCHING = "TOUCHING"
    SOUND = "SOUND"


ACTION_VERBS = {
    "forward": Verb.FWD,
    "backward": Verb.BWD,
    "rotate": Verb.ROT,
    "reverse": Verb.REV,
    "speed": Verb.SPD,
    "stop": Verb.STP,
    "block": Verb.BLK,
}
VERB_FUNCTORS = {verb: name for name, verb in ACTION_VERBS.items()}

# verbs taking (motors, values) with equal-length lists
PAIRED_VERBS = (Verb.FWD, Verb.BWD, Verb.ROT, Verb.SPD)
MOTOR_ONLY_VERBS = (Verb.REV, Verb.STP)

MOTORS = ("A", "B", "C")
PORTS = (1, 2, 3, 4)

PERCEPT_FUNCTORS = {
    PerceptKind.LIGHT: "light",
    PerceptKind.OBSTACLE: "obstacle",
    PerceptKind.TOUCHING: "touching",
    PerceptKind.SOUND: "sound",
}
PERCEPT_RANGES = {
    PerceptKind.LIGHT: (0, 1023),
    PerceptKind.OBSTACLE: (0, 255),
    PerceptKind.SOUND: (0, 100),
}


@dataclass(frozen=True)
class WireMessage:
    kind: WireKind
    action_id: int = 0
    verb: Optional[Verb] = None
    motors: Tuple[str, ...] = ()
    args: Tuple[int, ...] = ()
    percept: Optional[PerceptKind] = None
    port: int = 0
    value: Union[int, bool] = 0
    ok: bool = True
    reason: str = ""

    @property
    def is_action(self) -> bool:
        return self.kind is WireKind.ACTION

    def with_id(self, action_id: int) -> "WireMessage":
        return replace(self, action_id=action_id)

    def encode(self) -> str:
        if self.kind is WireKind.ACTION:
            motors = ",".join(m.lower() for m in self.motors)
            args = ",".join(str(a) for a in self.args)
            return f"A|{self.action_id}|{self.verb.value}|{motors}|{args}"
        if self.kind is WireKind.PERCEPT:
            if self.percept is PerceptKind.TOUCHING:
                value = "true" if self.value else "false"
            else:
                value = str(int(self.value))
            return f"P|{self.percept.value}|{self.port}|{value}"
        if self.kind is WireKind.ACK:
            if self.ok:
                return f"K|{self.action_id}"
            return f"K|{self.action_id}|NAK|{self.reason}"
        return "X"

    def __str__(self) -> str:
        return self.encode()

    @classmethod
    def decode(cls, line: str) -> "WireMessage":
        """Parse one record; raises MalformedAction/MalformedPercept/BridgeError."""
        fields = line.strip().split("|")
        tag = fields[0]
        if tag == "X" and len(fields) == 1:
            return exit_message()
        if tag == "A":
            return _decode_action(fields)
        if tag == "P":
            return _decode_percept(fields)
        if tag == "K":
            return _decode_ack(fields)
        raise BridgeError(f"unknown wire record '{line.strip()}'")


def exit_message() -> WireMessage:
    return WireMessage(WireKind.EXIT)


def ack_message(action_id: int, ok: bool = True, reason: str = "") -> WireMessage:
    return WireMessage(WireKind.ACK, action_id=action_id, ok=ok, reason=reason)


def percept_message(kind: PerceptKind, port: int, value: Union[int, bool]) -> WireMessage:
    message = WireMessage(WireKind.PERCEPT, percept=kind, port=port, value=value)
    _check_percept(message)
    return message


def _decode_action(fields) -> WireMessage:
    if len(fields) != 5:
        raise MalformedAction(f"action record needs 5 fields, got {len(fields)}")
    _, raw_id, raw_verb, raw_motors, raw_args = fields
    try:
        action_id = int(raw_id)
        verb = Verb(raw_verb)
        motors = tuple(m.upper() for m in raw_motors.split(",") if m)
        args = tuple(int(a) for a in raw_args.split(",") if a)
    except ValueError as e:
        raise MalformedAction(f"bad action record: {e}") from e
    message = WireMessage(WireKind.ACTION, action_id=action_id, verb=verb, motors=motors, args=args)
    _check_action(message)
    return message


def _decode_percept(fields) -> WireMessage:
    if len(fields) != 4:
        raise MalformedPercept(f"percept record needs 4 fields, got {len(fields)}")
    _, raw_kind, raw_port, raw_value = fields
    try:
        kind = PerceptKind(raw_kind)
        port = int(raw_port)
    except ValueError as e:
        raise MalformedPercept(f"bad percept record: {e}") from e
    if kind is PerceptKind.TOUCHING:
        if raw_value not in ("true", "false"):
            raise MalformedPercept(f"touch value must be true or false, got '{raw_value}'")
        value: Union[int, bool] = raw_value == "true"
    else:
        try:
            value = int(raw_value)
        except ValueError as e:
            raise MalformedPercept(f"bad percept value '{raw_value}'") from e
    return percept_message(kind, port, value)


def _decode_ack(fields) -> WireMessage:
    try:
        action_id = int(fields[1])
    except (IndexError, ValueError) as e:
        raise BridgeError(f"bad ack record: {'|'.join(fields)}") from e
    if len(fields) == 2:
        return ack_message(action_id)
    if len(fields) >= 3 and fields[2] == "NAK":
        return ack_message(action_id, ok=False, reason="|".join(fields[3:]))
    raise BridgeError(f"bad ack record: {'|'.join(fields)}")


def _check_action(message: WireMessage) -> None:
    for motor in message.motors:
        if motor not in MOTORS:
            raise MalformedAction(f"unknown motor '{motor.lower()}'")
    if message.verb in PAIRED_VERBS:
        if len(message.motors) != len(message.args):
            raise MalformedAction(
                f"{VERB_FUNCTORS[message.verb]} needs one value per motor "
                f"({len(message.motors)} motors, {len(message.args)} values)"
            )
    elif message.verb in MOTOR_ONLY_VERBS:
        if message.args:
            raise MalformedAction(f"{VERB_FUNCTORS[message.verb]} takes no values")
    elif message.verb is Verb.BLK:
        if message.motors or message.args not in ((0,), (1,)):
            raise MalformedAction("block takes a single true/false flag")


def _check_percept(message: WireMessage) -> None:
    if message.port not in PORTS:
        raise MalformedPercept(f"port {message.port} outside 1-4")
    if message.percept is PerceptKind.TOUCHING:
        if not isinstance(message.value, bool):
            raise MalformedPercept("touch value must be boolean")
        return
    low, high = PERCEPT_RANGES[message.percept]
    if isinstance(message.value, bool) or not low <= message.value <= high:
        raise MalformedPercept(
            f"{message.percept.value.lower()} value {message.value} outside {low}-{high}"
        )


def _motor_list(term: Term, action: str) -> Tuple[str, ...]:
    if not isinstance(term, ListTerm):
        raise MalformedAction(f"{action}: motors must be a list such as [a,b]")
    motors = []
    for item in term.items:
        if not isinstance(item, Atom) or item.name.upper() not in MOTORS:
            raise MalformedAction(f"{action}: unknown motor {item}")
        motors.append(item.name.upper())
    return tuple(motors)


def _value_list(term: Term, action: str) -> Tuple[int, ...]:
    if not isinstance(term, ListTerm):
        raise MalformedAction(f"{action}: values must be a list of numbers")
    values = []
    for item in term.items:
        if not isinstance(item, Number):
            raise MalformedAction(f"{action}: {item} is not a number")
        values.append(int(item.value))
    return tuple(values)


def encode_action(term: Term, action_id: int = 0) -> WireMessage:
    """Map an action term such as forward([a,b],[60,60]) to its wire message."""
    term = strip_annots(term)
    name, arity = functor_of(term)
    if name == "exit" and arity == 0:
        return exit_message()
    verb = ACTION_VERBS.get(name)
    if verb is None:
        raise UnknownAction(f"unknown action '{name}/{arity}'")
    if not is_ground(term):
        raise MalformedAction(f"action {term} is not ground")

    args = term.args if isinstance(term, Structure) else ()
    if verb in PAIRED_VERBS:
        if len(args) != 2:
            raise MalformedAction(f"{name} takes (Motors, Values)")
        message = WireMessage(
            WireKind.ACTION,
            action_id=action_id,
            verb=verb,
            motors=_motor_list(args[0], name),
            args=_value_list(args[1], name),
        )
    elif verb in MOTOR_ONLY_VERBS:
        if len(args) != 1:
            raise MalformedAction(f"{name} takes (Motors)")
        message = WireMessage(WireKind.ACTION, action_id=action_id, verb=verb, motors=_motor_list(args[0], name))
    else:
        if len(args) != 1 or not isinstance(args[0], Atom) or args[0].name not in ("true", "false"):
            raise MalformedAction("block takes true or false")
        flag = 1 if args[0].name == "true" else 0
        message = WireMessage(WireKind.ACTION, action_id=action_id, verb=verb, args=(flag,))

    _check_action(message)
    return message


def decode_action(message: WireMessage) -> Term:
    """Inverse of encode_action, used by traces and tests."""
    if message.kind is WireKind.EXIT:
        return Atom("exit")
    if message.kind is not WireKind.ACTION or message.verb is None:
        raise BridgeError(f"not an action record: {message}")
    name = VERB_FUNCTORS[message.verb]
    motors = ListTerm(tuple(Atom(m.lower()) for m in message.motors))
    if message.verb in PAIRED_VERBS:
        return Structure(name, (motors, ListTerm(tuple(Number(a) for a in message.args))))
    if message.verb in MOTOR_ONLY_VERBS:
        return Structure(name, (motors,))
    return Structure(name, (Atom("true" if message.args == (1,) else "false"),))


def decode_percept(message: WireMessage) -> Term:
    """PERCEPT record to an annotated belief such as light(1,360)[source(percept)]."""
    if message.kind is not WireKind.PERCEPT or message.percept is None:
        raise MalformedPercept(f"not a percept record: {message}")
    _check_percept(message)
    if message.percept is PerceptKind.TOUCHING:
        value: Term = Atom("true" if message.value else "false")
    else:
        value = Number(int(message.value))
    return Structure(
        PERCEPT_FUNCTORS[message.percept],
        (Number(message.port), value),
        (source_annot("percept"),),
    )
