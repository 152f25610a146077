"""
Simulated Lego NXT Robot.

Stands in for the brick and its robot: a differential-drive body on motors
A (left wheel) and B (right wheel), light/ultrasonic/touch/sound sensors
with noise and median filtering, and the worlds the robots drive in.

Classes:
    SimulatedBrick: Executes wire commands, steps physics, emits percepts
    RobotBody, MotorState: Pose, motor modes and tacho counts
    SensorMount, MedianWindow: Sensor placement and sample filtering
    LineTrack, CrossingWorld, EmptyWorld: Environments built from a WorldSpec

Features:
    - Exact pose integration for piecewise-constant wheel speeds
    - Rotations stop exactly at their tacho target
    - Blocking rotations defer their ACK and queue later commands
    - Light 0-1023 with gaussian noise and occasional spikes
    - Ultrasonic in 3 cm steps, 255 when nothing is in range
    - Seeded numpy generators for reproducible percept streams
"""

from .body import (
    DEFAULT_MOTOR_SPEED,
    DEFAULT_ROBOT_RADIUS,
    DEFAULT_TRACK_WIDTH,
    DEFAULT_WHEEL_DIAMETER,
    LEFT_MOTOR,
    RIGHT_MOTOR,
    MotorMode,
    MotorState,
    Pose,
    RobotBody,
    normalize_heading,
)
from .brick import SimulatedBrick, apply_command, build_brick, default_mount
from .sensors import (
    MedianWindow,
    SensorMount,
    SensorNoise,
    quantize_distance_cm,
    read_raw,
    sample_sensor,
)
from .world import (
    Box,
    CrossingWorld,
    EmptyWorld,
    LineTrack,
    World,
    WorldSpecError,
    build_world,
    load_world_spec,
    parse_world_spec,
    run_overrides,
)

__all__ = [
    "DEFAULT_MOTOR_SPEED",
    "DEFAULT_ROBOT_RADIUS",
    "DEFAULT_TRACK_WIDTH",
    "DEFAULT_WHEEL_DIAMETER",
    "LEFT_MOTOR",
    "RIGHT_MOTOR",
    "Box",
    "CrossingWorld",
    "EmptyWorld",
    "LineTrack",
    "MedianWindow",
    "MotorMode",
    "MotorState",
    "Pose",
    "RobotBody",
    "SensorMount",
    "SensorNoise",
    "SimulatedBrick",
    "World",
    "WorldSpecError",
    "apply_command",
    "build_brick",
    "build_world",
    "default_mount",
    "load_world_spec",
    "normalize_heading",
    "parse_world_spec",
    "quantize_distance_cm",
    "read_raw",
    "run_overrides",
    "sample_sensor",
]
