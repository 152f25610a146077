"""Unit tests for data models."""

import pytest
from pydantic import ValidationError

from src.models import (
    AgentConfig,
    AgentMetrics,
    CriterionResult,
    CycleReport,
    HarnessConfiguration,
    ProjectConfig,
    RobotPlacement,
    RunVerdict,
    ScenarioRun,
    SensorKind,
    WorldKind,
    WorldSpec,
)


def agent(name="walker", btname="nxt", **kwargs):
    return AgentConfig(
        name=name,
        source_path=f"{name}.asl",
        btname=btname,
        btaddress="00:16:53:0a:1b:01",
        **kwargs,
    )


@pytest.mark.unit
class TestCycleReport:
    """Test the per-cycle instrumentation record."""

    def test_idle_cycle(self):
        report = CycleReport(agent="bob", cycle=1, time_ms=0)

        assert report.idle
        assert "idle" not in report.export_dict()

    def test_busy_cycle(self):
        report = CycleReport(agent="bob", cycle=2, time_ms=10, event="+!move", step="forward([a,b],[60,60])")

        assert not report.idle

    def test_negative_counts_rejected(self):
        with pytest.raises(ValidationError):
            CycleReport(agent="bob", cycle=1, time_ms=0, percepts=-1)

    def test_unknown_field_rejected(self):
        with pytest.raises(ValidationError):
            CycleReport(agent="bob", cycle=1, time_ms=0, colour="red")


@pytest.mark.unit
class TestAgentMetrics:
    """Test per-agent totals."""

    def test_from_reports(self):
        reports = [
            CycleReport(agent="bob", cycle=1, time_ms=0, percept_queue_empty=True),
            CycleReport(agent="bob", cycle=2, time_ms=10, percept_queue_empty=False,
                        event="+!move", step="forward([a,b],[60,60])", actions_sent=1),
            CycleReport(agent="bob", cycle=3, time_ms=20, percept_queue_empty=False,
                        step=".send(blind,tell,x)", internal_sent=1, failure="boom", unique_ok=False),
        ]

        metrics = AgentMetrics.from_reports("bob", reports)

        assert metrics.cycles == 3
        assert metrics.steps == 2
        assert metrics.events == 1
        assert metrics.failures == 1
        assert metrics.empty_percept_cycles == 1
        assert metrics.actions_sent == 1
        assert metrics.internal_sent == 1
        assert metrics.uniqueness_violations == 1
        assert metrics.step_rate == pytest.approx(0.6667)

    def test_empty_rate(self):
        assert AgentMetrics(agent="bob").step_rate == 0.0


@pytest.mark.unit
class TestRunVerdict:
    """Test criterion lines and the verdict file text."""

    def test_line_roundtrip(self):
        result = CriterionResult(name="no_collision", passed=True, measured="min_gap=41.2mm")

        assert result.to_line() == "PASS no_collision min_gap=41.2mm"
        assert CriterionResult.from_line(result.to_line()) == result

    @pytest.mark.parametrize("line", ["PASS", "OK name value", "FAIL a b c"])
    def test_bad_lines(self, line):
        with pytest.raises(ValueError):
            CriterionResult.from_line(line)

    def test_whitespace_rejected(self):
        with pytest.raises(ValidationError):
            CriterionResult(name="no collision", passed=True)

    def test_verdict_text(self):
        verdict = RunVerdict(
            scenario="crossing",
            mode="sync",
            seed=3,
            latency="40+-0",
            criteria=[
                CriterionResult(name="final_bar_passed", passed=True, measured="x=1790"),
                CriterionResult(name="no_collision", passed=False, measured="min_gap=-3"),
            ],
        )

        assert not verdict.passed
        assert verdict.failed_criteria == ["no_collision"]
        assert verdict.get("final_bar_passed").passed
        assert verdict.get("absent") is None
        assert verdict.to_text().splitlines() == [
            "PASS final_bar_passed x=1790",
            "FAIL no_collision min_gap=-3",
            "# FAIL 1/2 criteria scenario=crossing mode=sync seed=3 latency=40+-0",
        ]

    def test_empty_verdict_passes(self):
        assert RunVerdict(scenario="empty").passed


@pytest.mark.unit
class TestScenarioRun:
    """Test settings resolution."""

    def test_defaults(self):
        run = ScenarioRun.resolve("a.mas2j", "b.world")

        assert run.mode == "async"
        assert run.lock_step
        assert run.latency_text == "30+-20"
        assert run.output_dir == "runs/latest"

    def test_precedence(self):
        config = HarnessConfiguration()
        config.run.seed = 11
        config.run.max_time_ms = 1000

        run = ScenarioRun.resolve(
            "a.mas2j",
            "b.world",
            config,
            world_overrides={"max_time_ms": 95000, "seed": 12},
            cli_overrides={"seed": 13, "mode": None},
        )

        assert run.seed == 13
        assert run.max_time_ms == 95000
        assert run.mode == "async"

    def test_socket_needs_free_running(self):
        with pytest.raises(ValueError):
            ScenarioRun(project_path="a", world_path="b", transport="socket")

        assert ScenarioRun(project_path="a", world_path="b", transport="socket", free_running=True).transport == "socket"

    def test_export_excludes_computed(self):
        exported = ScenarioRun(project_path="a", world_path="b").export_dict()

        assert "lock_step" not in exported
        assert exported["seed"] == 42


@pytest.mark.unit
class TestWorldSpec:
    """Test world geometry helpers."""

    def test_bar_edges_and_obstacle(self):
        world = WorldSpec(kind=WorldKind.CROSSING)

        assert world.bar_leading_edge(1) == 200
        assert world.bar_leading_edge(6) == 1700
        assert world.obstacle_x == 705

    def test_calibration_order(self):
        with pytest.raises(ValueError):
            WorldSpec(kind=WorldKind.LINETRACK, light_bright=100, light_dark=400)

    def test_default_placement(self):
        world = WorldSpec(kind=WorldKind.EMPTY)

        assert world.placement("ghost") == RobotPlacement()

    def test_mount_ports(self):
        with pytest.raises(ValidationError):
            RobotPlacement(mounts={5: (60.0, 0.0)})


@pytest.mark.unit
class TestProjectConfig:
    """Test agent and project validation."""

    def test_agent_defaults(self):
        config = agent(motors={"a": True}, sensors={2: SensorKind.ULTRASONIC})

        assert config.btaddress == "00:16:53:0A:1B:01"
        assert config.connected_motors == ["a"]
        assert config.active_sensors == {2: SensorKind.ULTRASONIC}
        assert config.sleep_ms == 50

    def test_percept_functors(self):
        assert SensorKind.ULTRASONIC.percept_functor == "obstacle"
        assert SensorKind.TOUCH.percept_functor == "touching"
        assert SensorKind.NONE.percept_functor is None

    @pytest.mark.parametrize("kwargs", [
        {"btaddress": "00:16:53"},
        {"motors": {"d": True}},
        {"sensors": {5: SensorKind.LIGHT}},
        {"sleep_ms": 0},
        {"name": "Walker"},
    ])
    def test_invalid_agent(self, kwargs):
        values = {"name": "walker", "source_path": "walker.asl", "btname": "nxt", "btaddress": "00:16:53:0A:1B:01"}
        values.update(kwargs)

        with pytest.raises(ValidationError):
            AgentConfig(**values)

    def test_unique_names(self):
        with pytest.raises(ValueError):
            ProjectConfig(agents=[agent(), agent(btname="other")])

    def test_unique_bricks(self):
        with pytest.raises(ValueError):
            ProjectConfig(agents=[agent(), agent(name="runner")])

    def test_source_resolution(self, tmp_path):
        project = ProjectConfig(agents=[agent()], base_dir=str(tmp_path))

        assert project.source_for(project.get_agent("walker")) == tmp_path / "walker.asl"
        with pytest.raises(KeyError):
            project.get_agent("nobody")
