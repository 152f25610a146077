"""Simulated environments: a line track, a bar crossing and an empty floor."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import ValidationError

from ...models.world_spec import RobotPlacement, WorldKind, WorldSpec

logger = logging.getLogger(__name__)

ULTRASONIC_RANGE_MM = 2550.0
TRACK_SAMPLE_MM = 2.0

_RUN_KEYS = ("tick_ms", "latency_ms", "jitter_ms", "max_time_ms", "action_timeout_ms", "seed")


class WorldSpecError(Exception):
    """Invalid world geometry or world file."""

    def __init__(self, message: str, key: str = "", line: Optional[int] = None):
        self.message = message
        self.key = key
        self.line = line
        super().__init__(str(self))

    def __str__(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.key:
            where.append(f"key '{self.key}'")
        return f"{', '.join(where)}: {self.message}" if where else self.message


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle on the floor."""
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def distance_to(self, x: float, y: float) -> float:
        dx = max(self.x_min - x, 0.0, x - self.x_max)
        dy = max(self.y_min - y, 0.0, y - self.y_max)
        return math.hypot(dx, dy)

    def overlaps_circle(self, x: float, y: float, radius: float) -> bool:
        return self.distance_to(x, y) < radius

    def ray_hit(self, x: float, y: float, heading: float) -> Optional[float]:
        """Distance along the ray to the box, or None (slab method)."""
        dx, dy = math.cos(heading), math.sin(heading)
        t_near, t_far = -math.inf, math.inf
        for origin, direction, low, high in ((x, dx, self.x_min, self.x_max), (y, dy, self.y_min, self.y_max)):
            if abs(direction) < 1e-12:
                if origin < low or origin > high:
                    return None
                continue
            t1 = (low - origin) / direction
            t2 = (high - origin) / direction
            t_near = max(t_near, min(t1, t2))
            t_far = min(t_far, max(t1, t2))
        if t_near > t_far or t_far < 0:
            return None
        return max(t_near, 0.0)


class World:
    """Floor intensity, obstacles and ambient sound shared by every robot."""

    kind = "world"

    def __init__(self, spec: WorldSpec, obstacles: Optional[List[Box]] = None):
        self.spec = spec
        self.obstacles: List[Box] = list(obstacles or [])
        self.ambient_sound = spec.sound_level

    def intensity(self, x: float, y: float) -> float:
        return self.spec.light_bright

    def raycast(self, x: float, y: float, heading: float, max_range: float = ULTRASONIC_RANGE_MM) -> Optional[float]:
        hits = [d for d in (box.ray_hit(x, y, heading) for box in self.obstacles) if d is not None]
        if not hits:
            return None
        nearest = min(hits)
        return nearest if nearest <= max_range else None

    def touching(self, x: float, y: float) -> bool:
        return any(box.contains(x, y) for box in self.obstacles)

    def collides(self, x: float, y: float, radius: float) -> bool:
        return any(box.overlaps_circle(x, y, radius) for box in self.obstacles)


class EmptyWorld(World):
    kind = "empty"


class LineTrack(World):
    """A bright path of straight and arc segments on a dark floor.

    The path starts at the origin heading along +x. Arcs turn left for
    positive angles.
    """

    kind = "linetrack"

    def __init__(self, spec: WorldSpec):
        super().__init__(spec)
        self.points = _trace_segments(spec.segments)
        deltas = np.diff(self.points, axis=0)
        self._seg_start = self.points[:-1]
        self._seg_vec = deltas
        self._seg_len = np.hypot(deltas[:, 0], deltas[:, 1])
        self._cum_len = np.concatenate(([0.0], np.cumsum(self._seg_len)))
        self.length = float(self._cum_len[-1])
        self.half_band = spec.band_width / 2.0

    def project(self, x: float, y: float) -> Tuple[float, float, float]:
        """Nearest point on the path: (progress s, signed lateral offset, distance)."""
        p = np.array([x, y])
        rel = p - self._seg_start
        t = np.clip(np.einsum("ij,ij->i", rel, self._seg_vec) / self._seg_len ** 2, 0.0, 1.0)
        nearest = self._seg_start + self._seg_vec * t[:, None]
        dist = np.hypot(*(p - nearest).T)
        i = int(np.argmin(dist))
        s = float(self._cum_len[i] + t[i] * self._seg_len[i])
        cross = self._seg_vec[i, 0] * rel[i, 1] - self._seg_vec[i, 1] * rel[i, 0]
        lateral = float(math.copysign(dist[i], cross)) if dist[i] > 0 else 0.0
        return s, lateral, float(dist[i])

    def on_band(self, x: float, y: float) -> bool:
        return self.project(x, y)[2] <= self.half_band

    def intensity(self, x: float, y: float) -> float:
        return self.spec.light_bright if self.on_band(x, y) else self.spec.light_dark


class CrossingWorld(World):
    """Dark bars across a bright floor with one obstacle after bar K.

    Bar j spans x in [first_bar_x + (j-1)*pitch, ... + bar_width] for every y.
    """

    kind = "crossing"

    def __init__(self, spec: WorldSpec):
        x0 = spec.obstacle_x
        obstacle = Box(x0, -spec.obstacle_width / 2.0, x0 + spec.obstacle_depth, spec.obstacle_width / 2.0)
        super().__init__(spec, [obstacle])
        self.obstacle = obstacle
        self.bars: List[Tuple[float, float]] = [
            (spec.bar_leading_edge(j), spec.bar_leading_edge(j) + spec.bar_width)
            for j in range(1, spec.bar_count + 1)
        ]

    def bar_at(self, x: float) -> Optional[int]:
        for index, (start, end) in enumerate(self.bars, start=1):
            if start <= x <= end:
                return index
        return None

    def bar_region(self, x: float) -> Optional[int]:
        """Index j of the region made of the gap before bar j plus bar j."""
        previous_end = -math.inf
        for index, (_, end) in enumerate(self.bars, start=1):
            if previous_end < x <= end:
                return index
            previous_end = end
        return None

    def intensity(self, x: float, y: float) -> float:
        return self.spec.light_dark if self.bar_at(x) is not None else self.spec.light_bright

    @property
    def final_bar_end(self) -> float:
        return self.bars[-1][1]


def _trace_segments(text: str) -> np.ndarray:
    """Sample the centre line of a segment list into an (N, 2) point array."""
    x, y, heading = 0.0, 0.0, 0.0
    points = [(x, y)]
    for index, item in enumerate(part.strip() for part in text.split(";") if part.strip()):
        fields = item.split(":")
        try:
            if fields[0] == "straight" and len(fields) == 2:
                length = float(fields[1])
                if length <= 0:
                    raise ValueError("length must be positive")
                steps = max(1, int(math.ceil(length / TRACK_SAMPLE_MM)))
                for k in range(1, steps + 1):
                    d = length * k / steps
                    points.append((x + d * math.cos(heading), y + d * math.sin(heading)))
                x, y = points[-1]
            elif fields[0] == "arc" and len(fields) == 3:
                radius = float(fields[1])
                sweep = math.radians(float(fields[2]))
                if radius <= 0 or sweep == 0:
                    raise ValueError("arc needs a positive radius and a non-zero angle")
                side = math.copysign(1.0, sweep)
                cx = x - side * radius * math.sin(heading)
                cy = y + side * radius * math.cos(heading)
                steps = max(1, int(math.ceil(abs(sweep) * radius / TRACK_SAMPLE_MM)))
                start_angle = heading - side * math.pi / 2.0
                for k in range(1, steps + 1):
                    a = start_angle + sweep * k / steps
                    points.append((cx + radius * math.cos(a), cy + radius * math.sin(a)))
                x, y = points[-1]
                heading += sweep
            else:
                raise ValueError(f"unknown segment '{item}'")
        except ValueError as e:
            raise WorldSpecError(f"segment {index + 1}: {e}", key="segments") from None
    if len(points) < 2:
        raise WorldSpecError("track needs at least one segment", key="segments")
    return np.array(points, dtype=float)


def build_world(spec: WorldSpec) -> World:
    """Deterministically build the world a spec describes."""
    if spec.kind is WorldKind.CROSSING:
        if spec.bar_count < 1:
            raise WorldSpecError("bar_count must be at least 1", key="bar_count")
        if spec.bar_width <= 0:
            raise WorldSpecError("bar_width must be positive", key="bar_width")
        if spec.bar_width >= spec.bar_pitch:
            raise WorldSpecError("bar_width must be smaller than bar_pitch", key="bar_width")
        if not 1 <= spec.obstacle_after <= spec.bar_count - 1:
            raise WorldSpecError(
                f"obstacle_after must be between 1 and {spec.bar_count - 1}", key="obstacle_after"
            )
        return CrossingWorld(spec)
    if spec.kind is WorldKind.LINETRACK:
        return LineTrack(spec)
    return EmptyWorld(spec)


def _parse_floats(text: str, count: int, key: str, line: int) -> Tuple[float, ...]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != count:
        raise WorldSpecError(f"expected {count} comma-separated numbers", key=key, line=line)
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise WorldSpecError(f"expected numbers, got '{text}'", key=key, line=line) from None


def parse_world_spec(text: str) -> WorldSpec:
    """Parse `key = value` world text into a WorldSpec."""
    values: Dict[str, Any] = {}
    robots: Dict[str, Dict[str, Any]] = {}

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise WorldSpecError(f"expected 'key = value', got '{line}'", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        if key.startswith("robot."):
            parts = key.split(".")
            if len(parts) != 3:
                raise WorldSpecError("expected robot.<btname>.<field>", key=key, line=number)
            _, btname, attr = parts
            placement = robots.setdefault(btname, {"mounts": {}})
            if attr == "start":
                x, y, heading = _parse_floats(value, 3, key, number)
                placement.update(x=x, y=y, heading_deg=heading)
            elif attr.startswith("mount") and attr[5:].isdigit():
                placement["mounts"][int(attr[5:])] = _parse_floats(value, 2, key, number)
            else:
                raise WorldSpecError(f"unknown robot field '{attr}'", key=key, line=number)
            continue
        if key in values:
            raise WorldSpecError("duplicate key", key=key, line=number)
        if key == "criteria":
            values[key] = [c.strip() for c in value.split(",") if c.strip()]
        else:
            values[key] = value

    if "kind" not in values:
        raise WorldSpecError("missing mandatory key", key="kind")
    try:
        values["robots"] = {name: RobotPlacement(**fields) for name, fields in robots.items()}
        spec = WorldSpec(**values)
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(part) for part in first.get("loc", ()))
        raise WorldSpecError(first.get("msg", str(e)), key=key) from e
    except ValueError as e:
        raise WorldSpecError(str(e)) from e
    logger.debug("Parsed world spec %s (%s)", spec.name, spec.kind.value)
    return spec


def load_world_spec(path: Union[str, Path]) -> WorldSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise WorldSpecError(f"cannot read world file {path}: {e}") from e
    return parse_world_spec(text)


def run_overrides(spec: WorldSpec) -> Dict[str, Any]:
    """Run tunables the world file sets explicitly."""
    return {key: getattr(spec, key) for key in _RUN_KEYS if getattr(spec, key) is not None}
