"""Unit tests for the simulated NXT robot and its worlds."""

import math

import numpy as np
import pytest

from src.lib.bridge import PerceptKind, WireMessage, encode_action
from src.lib.asl_parser import parse_term, parse_project_file
from src.lib.nxt_sim import (
    Box,
    CrossingWorld,
    LineTrack,
    MedianWindow,
    MotorState,
    Pose,
    RobotBody,
    SensorMount,
    SensorNoise,
    SimulatedBrick,
    WorldSpecError,
    apply_command,
    build_brick,
    build_world,
    parse_world_spec,
    quantize_distance_cm,
    run_overrides,
    sample_sensor,
)
from src.models.world_spec import WorldKind, WorldSpec


QUIET = SensorNoise(light_sigma=0.0, spike_probability=0.0, ultrasonic_jitter_steps=0, sound_sigma=0.0)


def action(text, action_id=1):
    return encode_action(parse_term(text), action_id)


def line_world():
    return LineTrack(WorldSpec(kind=WorldKind.LINETRACK, segments="straight:1000"))


@pytest.mark.unit
class TestKinematics:
    """Test the differential-drive body."""

    def test_straight_drive(self):
        """60 deg/s on both wheels for one second covers 60/360 of the wheel circumference."""
        body = RobotBody()
        body.motors["A"].forward(60)
        body.motors["B"].forward(60)

        body.step(1.0)

        assert body.pose.x == pytest.approx(29.32, abs=0.01)
        assert body.pose.y == pytest.approx(0.0, abs=1e-9)
        assert body.pose.heading == pytest.approx(0.0, abs=1e-12)

    def test_pivot_turn(self):
        """Opposite 200 degree rotations pivot in place by 1.629 rad, left positive."""
        body = RobotBody()
        body.motors["A"].rotate(-200)
        body.motors["B"].rotate(200)

        body.step(2.0)

        assert body.pose.heading == pytest.approx(1.629, abs=0.001)
        assert body.pose.x == pytest.approx(0.0, abs=1e-9)
        assert body.pose.y == pytest.approx(0.0, abs=1e-9)
        assert not body.any_rotating

    def test_rotation_stops_at_target(self):
        motor = MotorState()
        motor.rotate(90)

        turned = motor.advance(1.0)

        assert turned == pytest.approx(90.0)
        assert motor.tacho == 90.0
        assert not motor.rotating

    def test_step_is_split_at_targets(self):
        """Stepping in one big chunk or many small ones lands on the same pose."""
        coarse, fine = RobotBody(), RobotBody()
        for body in (coarse, fine):
            body.motors["A"].set_speed(300)
            body.motors["B"].set_speed(300)
            body.motors["A"].rotate(400)
            body.motors["B"].rotate(800)

        coarse.step(3.0)
        for _ in range(300):
            fine.step(0.01)

        assert coarse.pose.x == pytest.approx(fine.pose.x, abs=1e-6)
        assert coarse.pose.y == pytest.approx(fine.pose.y, abs=1e-6)
        assert coarse.pose.heading == pytest.approx(fine.pose.heading, abs=1e-9)

    def test_reverse_and_stop(self):
        motor = MotorState()
        motor.forward(60)
        motor.reverse()

        assert motor.velocity == -60
        motor.stop()
        assert motor.velocity == 0

    def test_heading_normalized(self):
        assert Pose(heading=3 * math.pi).heading == pytest.approx(math.pi)

    def test_world_point(self):
        body = RobotBody(pose=Pose(100, 0, math.pi / 2))

        x, y = body.world_point(60, -20)

        assert (x, y) == pytest.approx((120, 60))

    def test_invalid_geometry(self):
        with pytest.raises(ValueError):
            RobotBody(wheel_diameter=0)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_mirrored_motors_spin_in_place(self, seed):
        """Equal and opposite wheel speeds change heading only."""
        rng = np.random.default_rng(seed)
        body = RobotBody()
        for _ in range(20):
            speed = float(rng.uniform(10, 720))
            body.motors["A"].forward(-speed)
            body.motors["B"].forward(speed)
            body.step(float(rng.uniform(0.01, 0.5)))

        tacho_a, tacho_b = body.motors["A"].tacho, body.motors["B"].tacho
        expected = (body.arc_length(tacho_b) - body.arc_length(tacho_a)) / body.track_width

        assert tacho_a == pytest.approx(-tacho_b)
        assert (body.pose.x, body.pose.y) == (0.0, 0.0)
        assert math.remainder(body.pose.heading - expected, 2 * math.pi) == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("seed", [3, 4])
    def test_heading_tracks_tacho_difference(self, seed):
        """Whatever the wheels do, heading equals their arc difference over the track."""
        rng = np.random.default_rng(seed)
        body = RobotBody()
        for _ in range(30):
            for port in ("A", "B"):
                command = int(rng.integers(0, 3))
                if command == 0:
                    body.motors[port].forward(float(rng.uniform(-360, 360)))
                elif command == 1:
                    body.motors[port].rotate(float(rng.uniform(-400, 400)))
                else:
                    body.motors[port].stop()
            body.step(float(rng.uniform(0.05, 1.0)))

        turned = body.arc_length(body.motors["B"].tacho - body.motors["A"].tacho) / body.track_width

        assert math.remainder(body.pose.heading - turned, 2 * math.pi) == pytest.approx(0.0, abs=1e-9)

    def test_straight_travel_matches_tacho(self):
        body = RobotBody()
        for speed, duration in ((60, 1.0), (300, 0.25), (-120, 0.5)):
            body.motors["A"].forward(speed)
            body.motors["B"].forward(speed)
            body.step(duration)

        assert body.motors["A"].tacho == body.motors["B"].tacho == pytest.approx(75.0)
        assert body.pose.x == pytest.approx(body.arc_length(75.0))
        assert body.pose.heading == 0.0


@pytest.mark.unit
class TestMedianWindow:
    """Test the sensor median filter."""

    def test_matches_sorted_median(self):
        """Randomized streams read as the lower median of the last n samples."""
        rng = np.random.default_rng(2024)
        for size in (1, 2, 3, 5, 8):
            window = MedianWindow(size)
            history = []
            for value in rng.integers(0, 1024, 200):
                history.append(int(value))
                recent = sorted(history[-size:])
                expected = recent[(len(recent) - 1) // 2]

                assert window.push(int(value)) == expected

    def test_rejects_isolated_spikes(self):
        window = MedianWindow(5)
        readings = [window.push(v) for v in (500, 500, 900, 500, 500, 100, 500)]

        assert readings[2:] == [500, 500, 500, 500, 500]

    def test_invalid_size(self):
        with pytest.raises(ValueError):
            MedianWindow(0)

    def test_empty_window(self):
        with pytest.raises(ValueError):
            MedianWindow(3).value

    @pytest.mark.parametrize("size,passes_spikes", [(1, True), (3, False), (5, False), (9, False)])
    def test_one_spike_per_window(self, size, passes_spikes):
        """A single outlier in every window of n samples never reaches the reading for n >= 3."""
        window = MedianWindow(size)
        raw = []
        for i in range(6 * size):
            if i % size == size - 1:
                raw.append(1000 if (i // size) % 2 else 20)
            else:
                raw.append(500)

        readings = [window.push(v) for v in raw]

        if passes_spikes:
            assert readings == raw
        else:
            assert readings == [500] * len(raw)


@pytest.mark.unit
class TestSensors:
    """Test sensor readings and ultrasonic quantization."""

    @pytest.mark.parametrize("distance,expected", [
        (None, None),
        (0.0, 0),
        (134.0, 12),
        (135.0, 15),
        (145.0, 15),
        (2550.0, 255),
        (2600.0, None),
    ])
    def test_quantize(self, distance, expected):
        assert quantize_distance_cm(distance) == expected

    def test_light_on_and_off_band(self):
        world = line_world()
        rng = np.random.default_rng(0)
        on_band = SensorMount(port=1, kind="light", forward=60, lateral=0, window=MedianWindow(1))
        off_band = SensorMount(port=2, kind="light", forward=60, lateral=100, window=MedianWindow(1))

        bright = sample_sensor(on_band, RobotBody(), world, rng, QUIET)
        dark = sample_sensor(off_band, RobotBody(), world, rng, QUIET)

        assert bright.encode() == "P|LIGHT|1|760"
        assert dark.encode() == "P|LIGHT|2|40"

    def test_ultrasonic_sees_obstacle(self):
        spec = WorldSpec(kind=WorldKind.CROSSING)
        world = CrossingWorld(spec)
        mount = SensorMount(port=2, kind="ultrasonic", forward=50, lateral=0, window=MedianWindow(1))
        body = RobotBody(pose=Pose(spec.obstacle_x - 150, 0, 0))

        reading = sample_sensor(mount, body, world, np.random.default_rng(0), QUIET)

        assert reading.percept is PerceptKind.OBSTACLE
        assert reading.value == 9

    def test_ultrasonic_max_when_clear(self):
        world = line_world()
        mount = SensorMount(port=4, kind="ultrasonic", window=MedianWindow(1))

        reading = sample_sensor(mount, RobotBody(), world, np.random.default_rng(0), QUIET)

        assert reading.value == 255


@pytest.mark.unit
class TestWorlds:
    """Test world geometry."""

    def test_box_geometry(self):
        box = Box(0, -10, 10, 10)

        assert box.contains(5, 0)
        assert box.distance_to(-3, 14) == pytest.approx(5.0)
        assert box.ray_hit(-20, 0, 0) == pytest.approx(20.0)
        assert box.ray_hit(-20, 0, math.pi) is None
        assert box.ray_hit(-20, 50, 0) is None
        assert box.overlaps_circle(-5, 0, 6)

    def test_line_track_projection(self):
        world = line_world()

        s, lateral, dist = world.project(300, 20)

        assert s == pytest.approx(300)
        assert lateral == pytest.approx(20)
        assert dist == pytest.approx(20)
        assert world.project(300, -20)[1] == pytest.approx(-20)
        assert world.length == pytest.approx(1000)

    def test_s_curve_length(self):
        world = build_world(WorldSpec(kind=WorldKind.LINETRACK))
        arcs = 2 * 400 * math.radians(60)

        assert world.length == pytest.approx(400 + arcs, rel=1e-3)
        end_x, end_y = world.points[-1]
        assert end_y > 0

    def test_crossing_bars(self):
        world = build_world(WorldSpec(kind=WorldKind.CROSSING))

        assert world.bars[0] == (200, 225)
        assert world.bar_at(210) == 1
        assert world.bar_at(300) is None
        assert world.bar_region(300) == 2
        assert world.final_bar_end == pytest.approx(1725)
        assert world.obstacle.x_min == pytest.approx(705)
        assert world.intensity(210, 0) == 40
        assert world.intensity(300, 0) == 760

    @pytest.mark.parametrize("field,value", [
        ("obstacle_after", 0),
        ("obstacle_after", 6),
        ("bar_count", 0),
        ("bar_width", 300),
    ])
    def test_invalid_crossing(self, field, value):
        spec = WorldSpec(kind=WorldKind.CROSSING, **{field: value})

        with pytest.raises(WorldSpecError) as exc_info:
            build_world(spec)

        assert exc_info.value.key == field

    def test_bad_segment(self):
        with pytest.raises(WorldSpecError):
            build_world(WorldSpec(kind=WorldKind.LINETRACK, segments="zigzag:10"))


@pytest.mark.unit
class TestWorldFile:
    """Test world file parsing."""

    def test_shipped_crossing(self, crossing_world):
        spec = parse_world_spec(crossing_world.read_text(encoding="utf-8"))

        assert spec.kind is WorldKind.CROSSING
        assert spec.placement("blind").x == -400
        assert spec.placement("finder").mounts[2] == (50, 0)
        assert len(spec.criteria) == 8
        assert run_overrides(spec) == {"max_time_ms": 95000, "action_timeout_ms": 4000}

    def test_missing_kind(self):
        with pytest.raises(WorldSpecError) as exc_info:
            parse_world_spec("name = nothing\n")

        assert exc_info.value.key == "kind"

    def test_line_without_equals(self):
        with pytest.raises(WorldSpecError) as exc_info:
            parse_world_spec("kind = empty\nbars\n")

        assert exc_info.value.line == 2

    def test_bad_robot_field(self):
        with pytest.raises(WorldSpecError):
            parse_world_spec("kind = empty\nrobot.r.colour = red\n")

    def test_bad_value(self):
        with pytest.raises(WorldSpecError):
            parse_world_spec("kind = linetrack\nband_width = -5\n")

    def test_dark_above_bright(self):
        with pytest.raises(WorldSpecError):
            parse_world_spec("kind = crossing\nlight_dark = 900\n")


@pytest.mark.unit
class TestBrick:
    """Test command intake on the simulated brick."""

    def make_brick(self, motors=("A", "B")):
        sent = []

        class Link:
            def send(self, message):
                sent.append(message)

        body = RobotBody(connected_motors=motors)
        mount = SensorMount(port=1, kind="light", forward=60, window=MedianWindow(1))
        brick = SimulatedBrick("nxt", body, [mount], line_world(), np.random.default_rng(0), QUIET, Link())
        return brick, sent

    def test_unconnected_motor_refused(self):
        body = RobotBody(connected_motors=("A", "B"))

        ack = apply_command(body, action("forward([c],[60])", 4))

        assert not ack.ok
        assert ack.encode() == "K|4|NAK|motor c not connected"
        assert body.motors["C"].velocity == 0

    def test_block_flag(self):
        body = RobotBody()

        apply_command(body, action("block(true)"))

        assert body.blocking_rotate

    def test_command_acked_and_percept_streamed(self):
        brick, sent = self.make_brick()
        brick.receive(action("forward([a,b],[60,60])", 1))

        brick.tick(10, 10)

        assert [m.encode() for m in sent] == ["K|1", "P|LIGHT|1|760"]
        assert brick.body.pose.x > 0
        assert brick.commands_applied == 1

    def test_sampling_follows_sleep(self):
        brick, sent = self.make_brick()
        for now in range(10, 100, 10):
            brick.tick(now, 10)

        assert len(sent) == 2

    def test_blocking_rotate_defers_ack_and_queue(self):
        """With blocking on, the ACK and later commands wait for the rotation."""
        brick, sent = self.make_brick()
        brick.receive(action("block(true)", 1))
        brick.receive(action("rotate([a,b],[360,360])", 2))
        brick.receive(action("stop([a,b])", 3))

        brick.tick(10, 10)

        acks = [m.encode() for m in sent if m.encode().startswith("K")]
        assert acks == ["K|1"]
        assert brick.blocked

        now = 10
        while brick.blocked and now < 2000:
            now += 10
            brick.tick(now, 10)

        acks = [m.encode() for m in sent if m.encode().startswith("K")]
        assert acks == ["K|1", "K|2", "K|3"]
        assert brick.body.motors["A"].tacho == pytest.approx(360)

    def test_exit_halts(self):
        brick, sent = self.make_brick()
        brick.receive(WireMessage.decode("X"))

        brick.tick(10, 10)

        assert brick.halted
        assert sent == []

    def test_build_brick_from_project(self, crossing_world):
        project = parse_project_file("""
            finder finder.asl [btname="finder", btaddress="00:16:53:0A:1B:02",
                motora="t", motorb="t", motorc="f",
                sensor1="light", sensor2="ultrasonic", sensor3="none", sensor4="none", sleep="50"]
        """)
        spec = parse_world_spec(crossing_world.read_text(encoding="utf-8"))

        brick = build_brick(project.agents[0], spec, build_world(spec), np.random.default_rng(0))

        assert brick.body.connected_motors == ("A", "B")
        assert [(m.port, m.kind) for m in brick.mounts] == [(1, "light"), (2, "ultrasonic")]
        assert (brick.mounts[1].forward, brick.mounts[1].lateral) == (50, 0)
