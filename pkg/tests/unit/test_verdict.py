"""Unit tests for verdict criteria and run output storage."""

import numpy as np
import pytest

from src.lib.bridge import TO_ENGINE, TO_ROBOT
from src.models.cycle_report import CycleReport
from src.models.scenario_run import ScenarioRun
from src.models.world_spec import WorldKind, WorldSpec
from src.services.trace_output import TraceStorage, TraceStorageError, round_pose
from src.services.verdict import CRITERIA, RobotRecord, ScenarioOutputs, compute_verdict


CROSSING_CRITERIA = [
    "obstacle_reported_once",
    "avoid_adopted_at_bar",
    "no_collision",
    "final_bar_passed",
    "sharing_messages",
    "unique_beliefs",
    "cycle_mode_contract",
    "sync_ack_pairing",
]
TRACK_CRITERIA = ["track_completed", "off_band", "lateral_deviation", "unique_beliefs"]
OBSTACLE_EVENT = "+obstacle(2,12)[source(percept)]"
SHARED_BELIEF = "tell obstacle_after(2)[source(obstaclefinder)]"


def report(agent, cycle, **kwargs):
    kwargs.setdefault("percept_queue_empty", False)
    return CycleReport(agent=agent, cycle=cycle, time_ms=cycle * 10, **kwargs)


def straight_poses(x_from, x_to, y=0.0, steps=50, dt=100):
    xs = np.linspace(x_from, x_to, steps)
    return np.array([[i * dt, x, y, 0.0] for i, x in enumerate(xs)])


def crossing_outputs(mode="async", blind_y=200.0):
    """Two robots: the finder reports once, the blind robot swerves in its own lane."""
    spec = WorldSpec(kind=WorldKind.CROSSING, name="crossing", criteria=CROSSING_CRITERIA)
    finder_cycles = [
        report("obstaclefinder", 1, percept_queue_empty=mode == "async"),
        report("obstaclefinder", 5, percepts=1, event=OBSTACLE_EVENT, plan="#5 +obstacle(_,X)[source(percept)]",
               step="-+goal(avoid)"),
        report("obstaclefinder", 7, step=".send(blindagent, tell, obstacle_after(2))", internal_sent=1),
    ]
    blind_cycles = [
        report("blindagent", 1, percept_queue_empty=mode == "async"),
        report("blindagent", 8, messages=1, received=[SHARED_BELIEF]),
        report("blindagent", 10, step="-+bars_passed(1)"),
        report("blindagent", 20, step="-+bars_passed(2)"),
        report("blindagent", 21, step="-+goal(avoid)"),
    ]
    return ScenarioOutputs(
        run=ScenarioRun(project_path="crossing.mas2j", world_path="crossing.world", mode=mode, seed=4),
        world_spec=spec,
        robots={
            "finder": RobotRecord(agent="obstaclefinder", light_mounts=[(60.0, 0.0)]),
            "blind": RobotRecord(agent="blindagent", light_mounts=[(60.0, 0.0)]),
        },
        poses={
            "finder": straight_poses(0, 1900, y=-250.0),
            "blind": straight_poses(-400, 1900, y=blind_y),
        },
        wire={
            "finder": [
                (0, TO_ROBOT, "A|1|FWD|a,b|60,60"),
                (30, TO_ENGINE, "K|1"),
                (40, TO_ENGINE, "P|OBSTACLE|2|12"),
            ],
            "blind": [
                (0, TO_ROBOT, "A|1|FWD|a,b|60,60"),
                (25, TO_ENGINE, "K|1"),
                (50, TO_ENGINE, "P|LIGHT|1|40"),
            ],
        },
        cycles={"obstaclefinder": finder_cycles, "blindagent": blind_cycles},
    )


def track_outputs(off_band_rows=()):
    """A robot driving a straight 500 mm band; chosen rows drift 30 mm left."""
    spec = WorldSpec(kind=WorldKind.LINETRACK, name="straight", segments="straight:500",
                     band_width=70, criteria=TRACK_CRITERIA)
    poses = straight_poses(-60, 440, steps=11)
    for row in off_band_rows:
        poses[row, 2] = 30.0
    return ScenarioOutputs(
        run=ScenarioRun(project_path="line.mas2j", world_path="line.world"),
        world_spec=spec,
        robots={"tracker": RobotRecord(agent="linefollower", light_mounts=[(60.0, -20.0), (60.0, 20.0)])},
        poses={"tracker": poses},
        wire={"tracker": []},
        cycles={"linefollower": [report("linefollower", 1, percept_queue_empty=True)]},
    )


@pytest.mark.unit
class TestCrossingCriteria:
    """Test the crossing scenario criteria on synthetic outputs."""

    def test_clean_run_passes(self):
        verdict = compute_verdict(crossing_outputs())

        assert verdict.passed, verdict.to_text()
        assert verdict.get("obstacle_reported_once").measured == "sends=1,N=2"
        assert verdict.get("avoid_adopted_at_bar").measured == "bar=2,delay=1"
        assert verdict.get("sharing_messages").measured == "transport=1,internal=1"
        assert verdict.get("sync_ack_pairing").measured == "actions=2,acks=2"

    def test_collision(self):
        verdict = compute_verdict(crossing_outputs(blind_y=0.0))

        assert verdict.failed_criteria == ["no_collision"]

    def test_repeated_report(self):
        outputs = crossing_outputs()
        outputs.cycles["obstaclefinder"].append(
            report("obstaclefinder", 3, step=".send(blindagent, tell, obstacle_after(2))", internal_sent=1)
        )

        verdict = compute_verdict(outputs)

        assert not verdict.get("obstacle_reported_once").passed
        assert not verdict.get("sharing_messages").passed
        assert not verdict.get("avoid_adopted_at_bar").passed

    def test_late_adoption(self):
        outputs = crossing_outputs()
        outputs.cycles["blindagent"][-1] = report("blindagent", 30, step="-+goal(avoid)")

        result = compute_verdict(outputs).get("avoid_adopted_at_bar")

        assert not result.passed
        assert result.measured == "bar=2,delay=10"

    def test_robot_short_of_final_bar(self):
        outputs = crossing_outputs()
        outputs.poses["blind"] = straight_poses(-400, 1700, y=200.0)

        result = compute_verdict(outputs).get("final_bar_passed")

        assert not result.passed
        assert "blind=1640.0" in result.measured

    def test_relayed_percept_fails_sharing(self):
        outputs = crossing_outputs()
        outputs.wire["blind"].append((60, TO_ENGINE, "P|OBSTACLE|2|40"))

        assert not compute_verdict(outputs).get("sharing_messages").passed

    def test_share_without_triggering_percept(self):
        """A close reading on the wire alone does not count; a plan must have consumed it."""
        outputs = crossing_outputs()
        del outputs.cycles["obstaclefinder"][1]

        result = compute_verdict(outputs).get("sharing_messages")

        assert not result.passed
        assert result.measured == "transport=0,internal=1"

    def test_triggering_percept_must_come_over_the_wire(self):
        outputs = crossing_outputs()
        outputs.wire["finder"] = [entry for entry in outputs.wire["finder"] if "OBSTACLE" not in entry[2]]

        assert compute_verdict(outputs).get("sharing_messages").measured == "transport=0,internal=1"

    def test_share_triggered_twice(self):
        outputs = crossing_outputs()
        outputs.cycles["obstaclefinder"].insert(
            2, report("obstaclefinder", 6, event=OBSTACLE_EVENT, plan="#5 +obstacle(_,X)[source(percept)]")
        )

        result = compute_verdict(outputs).get("sharing_messages")

        assert not result.passed
        assert result.measured == "transport=2,internal=1"

    @pytest.mark.parametrize("received", [
        [],
        ["tell obstacle_after(2)[source(percept)]"],
        ["tell obstacle_after(3)[source(obstaclefinder)]"],
        [SHARED_BELIEF, SHARED_BELIEF],
    ])
    def test_receiver_belief_must_come_from_sender(self, received):
        outputs = crossing_outputs()
        outputs.cycles["blindagent"][1] = report("blindagent", 8, messages=len(received), received=received)

        assert not compute_verdict(outputs).get("sharing_messages").passed

    def test_sync_contract(self):
        assert compute_verdict(crossing_outputs(mode="sync")).get("cycle_mode_contract").passed

        outputs = crossing_outputs(mode="sync")
        outputs.cycles["blindagent"][0] = report("blindagent", 1, percept_queue_empty=True)
        assert not compute_verdict(outputs).get("cycle_mode_contract").passed

    def test_async_needs_empty_cycles(self):
        outputs = crossing_outputs()
        outputs.cycles["blindagent"][0] = report("blindagent", 1)

        result = compute_verdict(outputs).get("cycle_mode_contract")

        assert not result.passed
        assert result.measured == "obstaclefinder=1,blindagent=0"

    def test_duplicate_ack(self):
        outputs = crossing_outputs()
        outputs.wire["finder"].append((45, TO_ENGINE, "K|1"))

        assert not compute_verdict(outputs).get("sync_ack_pairing").passed

    def test_ack_without_action(self):
        outputs = crossing_outputs()
        outputs.wire["blind"].append((70, TO_ENGINE, "K|9"))

        assert not compute_verdict(outputs).get("sync_ack_pairing").passed

    def test_uniqueness_violation(self):
        outputs = crossing_outputs()
        outputs.cycles["blindagent"].append(report("blindagent", 22, unique_ok=False))

        result = compute_verdict(outputs).get("unique_beliefs")

        assert not result.passed
        assert result.measured == "1/9"


@pytest.mark.unit
class TestTrackCriteria:
    """Test the line track criteria on synthetic outputs."""

    def test_centred_run_passes(self):
        verdict = compute_verdict(track_outputs())

        assert verdict.passed, verdict.to_text()
        assert verdict.get("off_band").measured == "0ms"
        assert verdict.get("lateral_deviation").measured == "0.0mm"
        assert verdict.get("track_completed").measured == "500.0/500.0"

    def test_long_drift_is_off_band(self):
        verdict = compute_verdict(track_outputs(off_band_rows=range(1, 9)))

        assert verdict.get("off_band").measured == "800ms"
        assert not verdict.get("off_band").passed
        assert verdict.get("lateral_deviation").passed
        assert verdict.get("lateral_deviation").measured == "30.0mm"

    def test_short_drift_tolerated(self):
        result = compute_verdict(track_outputs(off_band_rows=range(3, 6))).get("off_band")

        assert result.passed
        assert result.measured == "300ms"

    def test_unfinished_track(self):
        outputs = track_outputs()
        outputs.poses["tracker"] = outputs.poses["tracker"][:5]

        assert not compute_verdict(outputs).get("track_completed").passed

    def test_track_criteria_on_crossing(self):
        outputs = crossing_outputs()
        outputs.world_spec.criteria = ["track_completed", "lateral_deviation"]

        verdict = compute_verdict(outputs)

        assert [c.measured for c in verdict.criteria] == ["not-a-track", "not-a-track"]


@pytest.mark.unit
class TestComputeVerdict:
    """Test the verdict assembly."""

    def test_unknown_criterion(self):
        outputs = track_outputs()
        outputs.world_spec.criteria = ["teleported"]

        verdict = compute_verdict(outputs)

        assert verdict.criteria[0].measured == "unknown-criterion"
        assert not verdict.passed

    def test_registry_covers_shipped_criteria(self):
        assert set(CROSSING_CRITERIA + TRACK_CRITERIA) <= set(CRITERIA)

    def test_run_fields_copied(self):
        verdict = compute_verdict(crossing_outputs(mode="sync"))

        assert (verdict.scenario, verdict.mode, verdict.seed, verdict.latency) == ("crossing", "sync", 4, "30+-20")


@pytest.mark.unit
class TestTraceStorage:
    """Test writing a run directory and loading it back."""

    def test_reloaded_outputs_give_same_verdict(self, tmp_path):
        outputs = crossing_outputs()
        storage = TraceStorage(tmp_path / "run")
        storage.write_outputs(outputs, {"cycles": 6})
        verdict = compute_verdict(outputs)
        storage.write_verdict(verdict)

        loaded = storage.load_outputs()

        assert compute_verdict(loaded).to_text() == verdict.to_text()
        assert loaded.wire == outputs.wire
        assert loaded.cycles == outputs.cycles
        assert loaded.robots["blind"].light_mounts == [(60.0, 0.0)]
        assert [c.to_line() for c in storage.load_verdict().criteria] == [c.to_line() for c in verdict.criteria]

    def test_file_layout(self, tmp_path):
        storage = TraceStorage(tmp_path)
        storage.write_outputs(track_outputs())

        assert (tmp_path / "run.yaml").exists()
        assert (tmp_path / "poses" / "tracker.trace").read_text().startswith("# time_ms x_mm y_mm heading_rad\n0 -60.000 ")
        assert (tmp_path / "wire" / "tracker.log").read_text() == ""
        assert len((tmp_path / "cycles" / "linefollower.log").read_text().splitlines()) == 1

    def test_recorders_can_be_disabled(self, tmp_path):
        outputs = track_outputs()
        outputs.run.record_poses = False
        storage = TraceStorage(tmp_path)
        storage.write_outputs(outputs)

        assert not (tmp_path / "poses").exists()
        assert storage.load_outputs().poses == {}

    def test_missing_run_file(self, tmp_path):
        with pytest.raises(TraceStorageError):
            TraceStorage(tmp_path).load_outputs()

    def test_bad_wire_line(self, tmp_path):
        storage = TraceStorage(tmp_path)
        storage.write_outputs(track_outputs())
        (tmp_path / "wire" / "tracker.log").write_text("garbage\n")

        with pytest.raises(TraceStorageError):
            storage.load_wire("tracker")

    def test_no_verdict_yet(self, tmp_path):
        assert TraceStorage(tmp_path).load_verdict() is None

    def test_round_pose(self):
        assert round_pose(10, 1.23456, -0.00049, 3.14159265) == (10, 1.235, -0.0, 3.141593)
