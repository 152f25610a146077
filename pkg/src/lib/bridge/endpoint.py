"""Agent-side end of the bridge: percept queue, action sending, ACK tracking."""

from __future__ import annotations

import itertools
import logging
import queue
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Protocol

from ..terms import Term, format_term
from .wire import (
    ActionTimeout,
    BridgeError,
    EndpointDown,
    MalformedPercept,
    WireKind,
    WireMessage,
    decode_percept,
    encode_action,
)

logger = logging.getLogger(__name__)

DEFAULT_ACTION_TIMEOUT_MS = 1000


class BridgeMode(str, Enum):
    SYNC = "sync"
    ASYNC = "async"


class OutcomeStatus(str, Enum):
    PENDING = "pending"
    ACKED = "acked"
    REFUSED = "refused"
    TIMED_OUT = "timed_out"


@dataclass
class ActionOutcome:
    action_id: int
    action: str
    sent_at_ms: int
    status: OutcomeStatus = OutcomeStatus.PENDING
    reason: str = ""
    resolved_at_ms: Optional[int] = None

    @property
    def done(self) -> bool:
        return self.status is not OutcomeStatus.PENDING

    @property
    def succeeded(self) -> bool:
        return self.status is OutcomeStatus.ACKED

    def raise_for_status(self) -> None:
        """Raise ActionTimeout for a missing ACK and BridgeError for a NAK."""
        if self.status is OutcomeStatus.TIMED_OUT:
            raise ActionTimeout(f"{self.action}: {self.reason}")
        if self.status is OutcomeStatus.REFUSED:
            raise BridgeError(f"{self.action}: {self.reason}")


class Link(Protocol):
    def send(self, message: WireMessage) -> None: ...

    @property
    def is_open(self) -> bool: ...


@dataclass
class EndpointStats:
    actions_sent: int = 0
    percepts_received: int = 0
    acks_received: int = 0
    malformed_percepts: int = 0
    naks: int = 0
    timeouts: int = 0

    @property
    def transport_messages(self) -> int:
        return self.actions_sent + self.percepts_received + self.acks_received


class BridgeEndpoint:
    """Percepts in, actions out, for one agent.

    `receive` is called from the transport side (possibly another thread);
    the percept queue is the only synchronization point with the engine.
    """

    def __init__(
        self,
        name: str,
        link: Link,
        mode: BridgeMode = BridgeMode.ASYNC,
        action_timeout_ms: int = DEFAULT_ACTION_TIMEOUT_MS,
    ):
        self.name = name
        self.link = link
        self.mode = BridgeMode(mode)
        self.action_timeout_ms = action_timeout_ms
        self.percepts: "queue.Queue[WireMessage]" = queue.Queue()
        self.stats = EndpointStats()
        self._ids = itertools.count(1)
        self._outstanding: Dict[int, ActionOutcome] = {}
        self._acks: Dict[int, WireMessage] = {}
        self._lock = threading.Lock()
        self.exited = False

    # transport side

    def receive(self, message: WireMessage) -> None:
        if message.kind is WireKind.PERCEPT:
            self.percepts.put(message)
        elif message.kind is WireKind.ACK:
            with self._lock:
                self.stats.acks_received += 1
                self._acks[message.action_id] = message
        else:
            logger.warning("%s: unexpected %s record from brick", self.name, message.kind.name)

    # engine side

    @property
    def percepts_waiting(self) -> bool:
        return not self.percepts.empty()

    def perceive(self, block: Optional[bool] = None, timeout: Optional[float] = None) -> List[Term]:
        """Drain every queued percept in arrival order and decode it.

        In sync mode the call waits for the first percept (up to `timeout`
        seconds when given); async mode never waits.
        """
        if block is None:
            block = self.mode is BridgeMode.SYNC
        if self.percepts.empty() and not self.link.is_open:
            raise EndpointDown(f"{self.name}: transport closed")

        raw: List[WireMessage] = []
        if block and self.percepts.empty():
            try:
                raw.append(self.percepts.get(timeout=timeout))
            except queue.Empty:
                return []
        while True:
            try:
                raw.append(self.percepts.get_nowait())
            except queue.Empty:
                break

        terms: List[Term] = []
        for message in raw:
            self.stats.percepts_received += 1
            try:
                terms.append(decode_percept(message))
            except MalformedPercept as e:
                self.stats.malformed_percepts += 1
                logger.warning("%s: skipping malformed percept %s: %s", self.name, message, e)
        return terms

    def act(self, action: Term, now_ms: int) -> ActionOutcome:
        """Encode and send an action; the outcome stays pending until its ACK.

        Encoding errors (UnknownAction, MalformedAction) propagate to the caller.
        """
        if self.exited or not self.link.is_open:
            raise EndpointDown(f"{self.name}: no further actions after exit")

        message = encode_action(action)
        action_id = 0
        if message.kind is WireKind.ACTION:
            action_id = next(self._ids)
            message = message.with_id(action_id)

        self.link.send(message)
        self.stats.actions_sent += 1
        outcome = ActionOutcome(action_id, format_term(action), now_ms)

        if message.kind is WireKind.EXIT:
            self.exited = True
            outcome.status = OutcomeStatus.ACKED
            outcome.resolved_at_ms = now_ms
            return outcome

        with self._lock:
            self._outstanding[action_id] = outcome
        return outcome

    def resolve(self, now_ms: int) -> List[ActionOutcome]:
        """Settle outstanding actions whose ACK arrived or whose timeout passed."""
        settled: List[ActionOutcome] = []
        with self._lock:
            for action_id, outcome in list(self._outstanding.items()):
                ack = self._acks.pop(action_id, None)
                if ack is not None:
                    outcome.status = OutcomeStatus.ACKED if ack.ok else OutcomeStatus.REFUSED
                    outcome.reason = ack.reason
                elif self.mode is BridgeMode.SYNC and now_ms - outcome.sent_at_ms >= self.action_timeout_ms:
                    outcome.status = OutcomeStatus.TIMED_OUT
                    outcome.reason = f"no acknowledgement within {self.action_timeout_ms} ms"
                    self.stats.timeouts += 1
                else:
                    continue
                outcome.resolved_at_ms = now_ms
                del self._outstanding[action_id]
                settled.append(outcome)

        for outcome in settled:
            if outcome.status is OutcomeStatus.REFUSED:
                self.stats.naks += 1
                if self.mode is BridgeMode.ASYNC:
                    logger.warning("%s: brick refused %s: %s", self.name, outcome.action, outcome.reason)
        return settled

    def has_settleable(self, now_ms: int) -> bool:
        """True when every outstanding action could be settled right now."""
        with self._lock:
            for action_id, outcome in self._outstanding.items():
                if action_id in self._acks:
                    continue
                if now_ms - outcome.sent_at_ms >= self.action_timeout_ms:
                    continue
                return False
        return True

    @property
    def outstanding(self) -> int:
        with self._lock:
            return len(self._outstanding)
