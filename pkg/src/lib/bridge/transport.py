"""In-process transport with injected latency, standing in for Bluetooth."""

from __future__ import annotations

import heapq
import itertools
import logging
import re
import threading
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .wire import WireMessage

logger = logging.getLogger(__name__)

TO_ROBOT = ">"
TO_ENGINE = "<"

_LATENCY_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*(?:(?:±|\+-|\+/-)\s*(\d+(?:\.\d+)?))?\s*$")


@dataclass(frozen=True)
class LatencyModel:
    """Fixed delay plus uniform jitter, in milliseconds."""
    latency_ms: float = 30.0
    jitter_ms: float = 20.0

    def __post_init__(self) -> None:
        if self.latency_ms < 0 or self.jitter_ms < 0:
            raise ValueError("latency and jitter must be non-negative")

    @classmethod
    def parse(cls, text: str) -> "LatencyModel":
        """Accept `30`, `30±20`, `30+-20` or `30+/-20`."""
        match = _LATENCY_RE.match(text)
        if not match:
            raise ValueError(f"latency must look like 30±20 or 30+-20, got '{text}'")
        jitter = float(match.group(2)) if match.group(2) is not None else 0.0
        return cls(float(match.group(1)), jitter)

    def sample(self, rng: np.random.Generator) -> float:
        if self.jitter_ms == 0:
            return self.latency_ms
        return max(0.0, self.latency_ms + rng.uniform(-self.jitter_ms, self.jitter_ms))

    def __str__(self) -> str:
        return f"{self.latency_ms:g}±{self.jitter_ms:g}"


class SimClock:
    """Simulated milliseconds, advanced only by the harness."""

    def __init__(self, start_ms: int = 0):
        self._now = start_ms

    @property
    def now_ms(self) -> int:
        return self._now

    def advance(self, dt_ms: int) -> None:
        self._now += dt_ms


class WallClock:
    """Milliseconds since construction, from the monotonic clock."""

    def __init__(self):
        self._start = time.monotonic()

    @property
    def now_ms(self) -> int:
        return int((time.monotonic() - self._start) * 1000)


class WireLog:
    """Every record that entered the transport, stamped with its send time."""

    def __init__(self):
        self.entries: List[Tuple[int, str, str]] = []
        self._lock = threading.Lock()

    def record(self, time_ms: int, direction: str, message: WireMessage) -> None:
        with self._lock:
            self.entries.append((time_ms, direction, message.encode()))

    def lines(self) -> List[str]:
        with self._lock:
            return [f"{t} {direction} {record}" for t, direction, record in self.entries]

    def count(self, direction: Optional[str] = None) -> int:
        with self._lock:
            return sum(1 for _, d, _ in self.entries if direction is None or d == direction)


class _Channel:
    """One direction: a heap ordered by delivery time that never reorders messages."""

    def __init__(self):
        self._heap: List[Tuple[float, int, WireMessage]] = []
        self._seq = itertools.count()
        self._last_deliver_at = 0.0

    def push(self, deliver_at: float, message: WireMessage) -> None:
        deliver_at = max(deliver_at, self._last_deliver_at)
        self._last_deliver_at = deliver_at
        heapq.heappush(self._heap, (deliver_at, next(self._seq), message))

    def pop_due(self, now_ms: float) -> List[WireMessage]:
        due = []
        while self._heap and self._heap[0][0] <= now_ms:
            due.append(heapq.heappop(self._heap)[2])
        return due

    def __len__(self) -> int:
        return len(self._heap)


Sink = Callable[[WireMessage], None]


class TransportPort:
    """The face of a transport one side sends through."""

    def __init__(self, transport: "LatencyTransport", direction: str):
        self._transport = transport
        self._direction = direction

    def send(self, message: WireMessage) -> None:
        self._transport.send(self._direction, message)

    @property
    def is_open(self) -> bool:
        return not self._transport.closed


class LatencyTransport:
    """Bidirectional link between one agent endpoint and one brick.

    Messages are logged and counted when sent, then handed to the
    receiving sink once `deliver(now)` passes their delivery time.
    """

    def __init__(
        self,
        name: str,
        clock,
        latency: Optional[LatencyModel] = None,
        rng: Optional[np.random.Generator] = None,
        wire_log: Optional[WireLog] = None,
    ):
        self.name = name
        self.clock = clock
        self.latency = latency or LatencyModel()
        self.rng = rng if rng is not None else np.random.default_rng()
        self.wire_log = wire_log if wire_log is not None else WireLog()
        self._channels: Dict[str, _Channel] = {TO_ROBOT: _Channel(), TO_ENGINE: _Channel()}
        self._sinks: Dict[str, Optional[Sink]] = {TO_ROBOT: None, TO_ENGINE: None}
        self.sent: Dict[str, int] = {TO_ROBOT: 0, TO_ENGINE: 0}
        self.closed = False
        self._lock = threading.Lock()

    def connect(self, engine_sink: Sink, robot_sink: Sink) -> None:
        self._sinks[TO_ENGINE] = engine_sink
        self._sinks[TO_ROBOT] = robot_sink

    @property
    def engine_port(self) -> TransportPort:
        return TransportPort(self, TO_ROBOT)

    @property
    def robot_port(self) -> TransportPort:
        return TransportPort(self, TO_ENGINE)

    def send(self, direction: str, message: WireMessage) -> None:
        with self._lock:
            if self.closed:
                logger.debug("%s: dropping %s on closed transport", self.name, message)
                return
            now = self.clock.now_ms
            self.wire_log.record(now, direction, message)
            self.sent[direction] += 1
            self._channels[direction].push(now + self.latency.sample(self.rng), message)

    def deliver(self, now_ms: Optional[float] = None) -> int:
        """Hand every message due by now to its sink; returns how many were delivered."""
        now = self.clock.now_ms if now_ms is None else now_ms
        with self._lock:
            batches = [(direction, channel.pop_due(now)) for direction, channel in self._channels.items()]
        delivered = 0
        for direction, messages in batches:
            sink = self._sinks[direction]
            for message in messages:
                delivered += 1
                if sink is not None:
                    sink(message)
        return delivered

    def in_flight(self) -> int:
        with self._lock:
            return sum(len(channel) for channel in self._channels.values())

    def close(self) -> None:
        with self._lock:
            self.closed = True
