"""Sensor mounts, noise models and median filtering."""

from __future__ import annotations

import math
import statistics
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Optional, Union

import numpy as np

from ..bridge import PerceptKind, WireMessage, percept_message
from .body import RobotBody

DEFAULT_WINDOW = 5
DEFAULT_SLEEP_MS = 50
ULTRASONIC_STEP_CM = 3
ULTRASONIC_MAX_CM = 255
LIGHT_MAX = 1023
SOUND_MAX = 100

KIND_TO_PERCEPT = {
    "light": PerceptKind.LIGHT,
    "ultrasonic": PerceptKind.OBSTACLE,
    "touch": PerceptKind.TOUCHING,
    "sound": PerceptKind.SOUND,
}


class MedianWindow:
    """Ring of the last n raw samples; reads as their (lower) median."""

    def __init__(self, size: int = DEFAULT_WINDOW):
        if size < 1:
            raise ValueError("median window needs at least one sample")
        self.size = size
        self._samples: Deque[int] = deque(maxlen=size)

    def push(self, value: int) -> int:
        self._samples.append(value)
        return self.value

    @property
    def value(self) -> int:
        if not self._samples:
            raise ValueError("median of an empty window")
        return statistics.median_low(self._samples)

    def __len__(self) -> int:
        return len(self._samples)


@dataclass(frozen=True)
class SensorNoise:
    light_sigma: float = 8.0
    spike_probability: float = 0.05
    spike_magnitude: float = 300.0
    ultrasonic_jitter_steps: int = 1
    sound_sigma: float = 3.0


@dataclass
class SensorMount:
    port: int
    kind: str
    forward: float = 0.0
    lateral: float = 0.0
    window: MedianWindow = field(default_factory=MedianWindow)
    sleep_ms: int = DEFAULT_SLEEP_MS
    next_sample_ms: int = 0

    @property
    def percept_kind(self) -> PerceptKind:
        return KIND_TO_PERCEPT[self.kind]

    def due(self, now_ms: int) -> bool:
        return now_ms >= self.next_sample_ms


def quantize_distance_cm(distance_mm: Optional[float]) -> Optional[int]:
    """Round a range to the nearest 3 cm step, halves rounding up; None past 255 cm."""
    if distance_mm is None:
        return None
    steps = math.floor(distance_mm / 10.0 / ULTRASONIC_STEP_CM + 0.5)
    value = steps * ULTRASONIC_STEP_CM
    if value > ULTRASONIC_MAX_CM:
        return None
    return value


def read_raw(mount: SensorMount, body: RobotBody, world, rng: np.random.Generator, noise: SensorNoise) -> Union[int, bool]:
    """One noisy reading before filtering."""
    x, y = body.world_point(mount.forward, mount.lateral)

    if mount.kind == "light":
        value = world.intensity(x, y) + rng.normal(0.0, noise.light_sigma)
        if rng.random() < noise.spike_probability:
            value += noise.spike_magnitude if rng.random() < 0.5 else -noise.spike_magnitude
        return int(round(min(max(value, 0.0), LIGHT_MAX)))

    if mount.kind == "ultrasonic":
        cm = quantize_distance_cm(world.raycast(x, y, body.pose.heading))
        if cm is None:
            return ULTRASONIC_MAX_CM
        steps = noise.ultrasonic_jitter_steps
        if steps > 0:
            cm += ULTRASONIC_STEP_CM * int(rng.integers(-steps, steps + 1))
        return int(min(max(cm, 0), ULTRASONIC_MAX_CM))

    if mount.kind == "touch":
        return bool(world.touching(x, y))

    if mount.kind == "sound":
        value = world.ambient_sound + rng.normal(0.0, noise.sound_sigma)
        return int(round(min(max(value, 0.0), SOUND_MAX)))

    raise ValueError(f"no sensor model for kind '{mount.kind}'")


def sample_sensor(
    mount: SensorMount,
    body: RobotBody,
    world,
    rng: np.random.Generator,
    noise: Optional[SensorNoise] = None,
) -> WireMessage:
    """Read, push into the mount's window and emit the window median as a percept."""
    raw = read_raw(mount, body, world, rng, noise or SensorNoise())
    filtered = mount.window.push(int(raw))
    value: Union[int, bool] = bool(filtered) if mount.kind == "touch" else int(filtered)
    return percept_message(mount.percept_kind, mount.port, value)
