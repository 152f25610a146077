"""
Agent/Brick Bridge Library.

Everything between an agent's reasoning cycle and its NXT brick: the wire
codec for actions and percepts, the agent-side endpoint with its percept
queue and ACK bookkeeping, and transports that carry records with latency.

Classes:
    WireMessage: One ACTION, PERCEPT, ACK or EXIT record
    BridgeEndpoint: Agent-side percept queue and action sender
    LatencyTransport: In-process link with fixed-plus-jitter delay
    BrickServer, SocketLink: The same records over a local websocket

Features:
    - `forward([a,b],[60,60])` <-> `A|1|FWD|a,b|60,60`
    - `P|LIGHT|1|360` -> `light(1,360)[source(percept)]`
    - Sync mode (wait for percepts and ACKs) or async mode (never wait)
    - Per-direction FIFO delivery; counters and wire log written at send time
"""

from .endpoint import (
    DEFAULT_ACTION_TIMEOUT_MS,
    ActionOutcome,
    BridgeEndpoint,
    BridgeMode,
    EndpointStats,
    OutcomeStatus,
)
from .transport import (
    TO_ENGINE,
    TO_ROBOT,
    LatencyModel,
    LatencyTransport,
    SimClock,
    TransportPort,
    WallClock,
    WireLog,
)
from .wire import (
    ActionTimeout,
    BridgeError,
    EndpointDown,
    MalformedAction,
    MalformedPercept,
    PerceptKind,
    UnknownAction,
    Verb,
    WireKind,
    WireMessage,
    ack_message,
    decode_action,
    decode_percept,
    encode_action,
    exit_message,
    percept_message,
)

__all__ = [
    "DEFAULT_ACTION_TIMEOUT_MS",
    "TO_ENGINE",
    "TO_ROBOT",
    "ActionOutcome",
    "ActionTimeout",
    "BridgeEndpoint",
    "BridgeError",
    "BridgeMode",
    "EndpointDown",
    "EndpointStats",
    "LatencyModel",
    "LatencyTransport",
    "MalformedAction",
    "MalformedPercept",
    "OutcomeStatus",
    "PerceptKind",
    "SimClock",
    "TransportPort",
    "UnknownAction",
    "Verb",
    "WallClock",
    "WireKind",
    "WireLog",
    "WireMessage",
    "ack_message",
    "decode_action",
    "decode_percept",
    "encode_action",
    "exit_message",
    "percept_message",
]
