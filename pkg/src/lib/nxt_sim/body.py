"""Differential-drive body: three NXT motors and exact pose integration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Optional, Tuple

DEFAULT_WHEEL_DIAMETER = 56.0
DEFAULT_TRACK_WIDTH = 120.0
DEFAULT_ROBOT_RADIUS = 60.0
DEFAULT_MOTOR_SPEED = 360.0
MAX_STEP_S = 0.05

LEFT_MOTOR = "A"
RIGHT_MOTOR = "B"


class MotorMode(str, Enum):
    IDLE = "idle"
    FORWARD = "forward"
    BACKWARD = "backward"
    ROTATING = "rotating"


def normalize_heading(theta: float) -> float:
    """Map an angle into (-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass
class MotorState:
    mode: MotorMode = MotorMode.IDLE
    speed: float = DEFAULT_MOTOR_SPEED
    rotation_target: Optional[float] = None
    tacho: float = 0.0

    @property
    def velocity(self) -> float:
        """Signed degrees per second right now."""
        if self.mode is MotorMode.FORWARD:
            return self.speed
        if self.mode is MotorMode.BACKWARD:
            return -self.speed
        if self.mode is MotorMode.ROTATING and self.rotation_target is not None:
            remaining = self.rotation_target - self.tacho
            if remaining == 0:
                return 0.0
            return math.copysign(self.speed, remaining)
        return 0.0

    def forward(self, speed: float) -> None:
        self.speed = abs(float(speed))
        self.mode = MotorMode.FORWARD if speed >= 0 else MotorMode.BACKWARD
        self.rotation_target = None

    def backward(self, speed: float) -> None:
        self.speed = abs(float(speed))
        self.mode = MotorMode.BACKWARD if speed >= 0 else MotorMode.FORWARD
        self.rotation_target = None

    def rotate(self, degrees: float) -> None:
        """Turn by a relative angle at the current speed; sign is direction."""
        if degrees == 0:
            self.stop()
            return
        self.rotation_target = self.tacho + float(degrees)
        self.mode = MotorMode.ROTATING

    def reverse(self) -> None:
        if self.mode is MotorMode.FORWARD:
            self.mode = MotorMode.BACKWARD
        elif self.mode is MotorMode.BACKWARD:
            self.mode = MotorMode.FORWARD
        elif self.mode is MotorMode.ROTATING and self.rotation_target is not None:
            self.rotation_target = self.tacho - (self.rotation_target - self.tacho)

    def set_speed(self, speed: float) -> None:
        self.speed = abs(float(speed))

    def stop(self) -> None:
        self.mode = MotorMode.IDLE
        self.rotation_target = None

    @property
    def rotating(self) -> bool:
        return self.mode is MotorMode.ROTATING

    def time_to_target(self) -> Optional[float]:
        if not self.rotating or self.rotation_target is None or self.speed <= 0:
            return None
        return abs(self.rotation_target - self.tacho) / self.speed

    def advance(self, dt: float) -> float:
        """Turn for dt seconds, clamping at a rotation target; returns degrees turned."""
        if self.rotating and self.rotation_target is not None:
            remaining = self.rotation_target - self.tacho
            step = math.copysign(min(abs(remaining), self.speed * dt), remaining)
            self.tacho += step
            if abs(self.rotation_target - self.tacho) <= 1e-9:
                self.tacho = self.rotation_target
                self.stop()
            return step
        delta = self.velocity * dt
        self.tacho += delta
        return delta


@dataclass
class Pose:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0

    def __post_init__(self) -> None:
        self.heading = normalize_heading(self.heading)

    def as_tuple(self) -> Tuple[float, float, float]:
        return self.x, self.y, self.heading


@dataclass
class RobotBody:
    """Pose, motors and geometry of one simulated NXT robot."""

    pose: Pose = field(default_factory=Pose)
    wheel_diameter: float = DEFAULT_WHEEL_DIAMETER
    track_width: float = DEFAULT_TRACK_WIDTH
    radius: float = DEFAULT_ROBOT_RADIUS
    connected_motors: Tuple[str, ...] = ("A", "B", "C")
    blocking_rotate: bool = False
    motors: Dict[str, MotorState] = field(
        default_factory=lambda: {port: MotorState() for port in ("A", "B", "C")}
    )

    def __post_init__(self) -> None:
        if self.wheel_diameter <= 0 or self.track_width <= 0:
            raise ValueError("wheel_diameter and track_width must be positive")

    def world_point(self, forward: float, lateral: float) -> Tuple[float, float]:
        """Body-frame offset (forward, left-positive lateral) to world coordinates."""
        c, s = math.cos(self.pose.heading), math.sin(self.pose.heading)
        return (
            self.pose.x + forward * c - lateral * s,
            self.pose.y + forward * s + lateral * c,
        )

    def arc_length(self, degrees: float) -> float:
        return degrees / 360.0 * math.pi * self.wheel_diameter

    @property
    def any_rotating(self) -> bool:
        return any(self.motors[port].rotating for port in self.connected_motors)

    def rotating_motors(self, ports: Iterable[str]) -> bool:
        return any(self.motors[port].rotating for port in ports)

    def step(self, dt: float) -> None:
        """Advance dt seconds, splitting at every rotation-target crossing."""
        remaining = dt
        while remaining > 1e-12:
            chunk = min(remaining, MAX_STEP_S)
            for port in self.connected_motors:
                t = self.motors[port].time_to_target()
                if t is not None and 0 < t < chunk:
                    chunk = t
            left = self.motors[LEFT_MOTOR].advance(chunk) if LEFT_MOTOR in self.connected_motors else 0.0
            right = self.motors[RIGHT_MOTOR].advance(chunk) if RIGHT_MOTOR in self.connected_motors else 0.0
            for port in self.connected_motors:
                if port not in (LEFT_MOTOR, RIGHT_MOTOR):
                    self.motors[port].advance(chunk)
            self._integrate(self.arc_length(left), self.arc_length(right))
            remaining -= chunk

    def _integrate(self, arc_left: float, arc_right: float) -> None:
        pose = self.pose
        if arc_left == arc_right:
            pose.x += arc_left * math.cos(pose.heading)
            pose.y += arc_left * math.sin(pose.heading)
            return
        dtheta = (arc_right - arc_left) / self.track_width
        distance = (arc_left + arc_right) / 2.0
        if distance != 0.0:
            # constant wheel speeds over the chunk trace a circular arc
            radius = distance / dtheta
            pose.x += radius * (math.sin(pose.heading + dtheta) - math.sin(pose.heading))
            pose.y -= radius * (math.cos(pose.heading + dtheta) - math.cos(pose.heading))
        pose.heading = normalize_heading(pose.heading + dtheta)
