"""The simulated NXT brick: command intake, physics stepping and sensor sampling."""

from __future__ import annotations

import logging
import math
import queue
from collections import deque
from typing import Deque, Dict, Iterable, Optional, Tuple

import numpy as np

from ...models.project_config import AgentConfig, SensorKind
from ...models.world_spec import WorldSpec
from ..bridge import Verb, WireKind, WireMessage, ack_message
from .body import Pose, RobotBody
from .sensors import MedianWindow, SensorMount, SensorNoise, sample_sensor
from .world import World

logger = logging.getLogger(__name__)

DEFAULT_LIGHT_MOUNTS: Dict[int, Tuple[float, float]] = {
    1: (60.0, -20.0),
    2: (60.0, 20.0),
    3: (60.0, 0.0),
    4: (60.0, 0.0),
}
DEFAULT_MOUNTS: Dict[str, Tuple[float, float]] = {
    "ultrasonic": (50.0, 0.0),
    "touch": (60.0, 0.0),
    "sound": (0.0, 0.0),
}


def default_mount(kind: SensorKind, port: int) -> Tuple[float, float]:
    if kind is SensorKind.LIGHT:
        return DEFAULT_LIGHT_MOUNTS[port]
    return DEFAULT_MOUNTS[kind.value]


def apply_command(body: RobotBody, message: WireMessage) -> Optional[WireMessage]:
    """Apply one ACTION to the body.

    Returns the ACK to send now, or None when the ACK waits for a blocking
    rotation to finish. Commands naming an unconnected motor are refused
    with a negative ACK and change nothing.
    """
    if message.kind is not WireKind.ACTION:
        raise ValueError(f"not an action: {message}")

    missing = [m for m in message.motors if m not in body.connected_motors]
    if missing:
        reason = "motor " + ",".join(m.lower() for m in missing) + " not connected"
        return ack_message(message.action_id, ok=False, reason=reason)

    verb = message.verb
    if verb is Verb.BLK:
        body.blocking_rotate = message.args == (1,)
        return ack_message(message.action_id)

    if verb in (Verb.FWD, Verb.BWD, Verb.ROT, Verb.SPD):
        for motor, value in zip(message.motors, message.args):
            state = body.motors[motor]
            if verb is Verb.FWD:
                state.forward(value)
            elif verb is Verb.BWD:
                state.backward(value)
            elif verb is Verb.ROT:
                state.rotate(value)
            else:
                state.set_speed(value)
    else:
        for motor in message.motors:
            if verb is Verb.REV:
                body.motors[motor].reverse()
            else:
                body.motors[motor].stop()

    if verb is Verb.ROT and body.blocking_rotate and body.rotating_motors(message.motors):
        return None
    return ack_message(message.action_id)


class SimulatedBrick:
    """One robot: executes wire commands, moves, and streams filtered percepts."""

    def __init__(
        self,
        name: str,
        body: RobotBody,
        mounts: Iterable[SensorMount],
        world: World,
        rng: np.random.Generator,
        noise: Optional[SensorNoise] = None,
        link=None,
    ):
        self.name = name
        self.body = body
        self.mounts = sorted(mounts, key=lambda m: m.port)
        self.world = world
        self.rng = rng
        self.noise = noise or SensorNoise()
        self.link = link
        self.inbox: "queue.Queue[WireMessage]" = queue.Queue()
        self.halted = False
        self._deferred: Deque[WireMessage] = deque()
        self._blocking: Optional[WireMessage] = None
        self.commands_applied = 0

    def receive(self, message: WireMessage) -> None:
        self.inbox.put(message)

    def _send(self, message: WireMessage) -> None:
        if self.link is not None:
            self.link.send(message)

    def _execute(self, message: WireMessage) -> None:
        if message.kind is WireKind.EXIT:
            for motor in self.body.motors.values():
                motor.stop()
            self.halted = True
            logger.info("%s: exit received, brick halted", self.name)
            return
        ack = apply_command(self.body, message)
        self.commands_applied += 1
        if ack is None:
            self._blocking = message
            return
        if not ack.ok:
            logger.warning("%s: refused %s: %s", self.name, message, ack.reason)
        self._send(ack)

    def _drain_deferred(self) -> None:
        while self._deferred and self._blocking is None and not self.halted:
            self._execute(self._deferred.popleft())

    def tick(self, now_ms: int, dt_ms: int) -> None:
        """Take commands, move dt_ms, then sample every sensor that is due."""
        if self.halted:
            return

        while True:
            try:
                self._deferred.append(self.inbox.get_nowait())
            except queue.Empty:
                break
        self._drain_deferred()

        self.body.step(dt_ms / 1000.0)

        if self._blocking is not None and not self.body.rotating_motors(self._blocking.motors):
            self._send(ack_message(self._blocking.action_id))
            self._blocking = None
            self._drain_deferred()

        if self.halted:
            return
        for mount in self.mounts:
            if mount.due(now_ms):
                self._send(sample_sensor(mount, self.body, self.world, self.rng, self.noise))
                mount.next_sample_ms += mount.sleep_ms
                if mount.next_sample_ms <= now_ms:
                    mount.next_sample_ms = now_ms + mount.sleep_ms

    @property
    def blocked(self) -> bool:
        return self._blocking is not None


def build_brick(
    agent: AgentConfig,
    spec: WorldSpec,
    world: World,
    rng: np.random.Generator,
    link=None,
) -> SimulatedBrick:
    """Assemble the brick an agent's project entry describes, placed per the world spec."""
    placement = spec.placement(agent.btname)
    body = RobotBody(
        pose=Pose(placement.x, placement.y, math.radians(placement.heading_deg)),
        wheel_diameter=spec.wheel_diameter,
        track_width=spec.track_width,
        radius=spec.robot_radius,
        connected_motors=tuple(m.upper() for m in agent.connected_motors),
    )
    mounts = []
    for port, kind in agent.active_sensors.items():
        forward, lateral = placement.mounts.get(port, default_mount(kind, port))
        mounts.append(SensorMount(
            port=port,
            kind=kind.value,
            forward=forward,
            lateral=lateral,
            window=MedianWindow(spec.median_window),
            sleep_ms=agent.sleep_ms,
        ))
    noise = SensorNoise(
        light_sigma=spec.light_sigma,
        spike_probability=spec.spike_probability,
        spike_magnitude=spec.spike_magnitude,
        ultrasonic_jitter_steps=spec.ultrasonic_jitter_steps,
        sound_sigma=spec.sound_sigma,
    )
    return SimulatedBrick(agent.btname, body, mounts, world, rng, noise, link)
