"""
End-to-end scenario runs.

Each test drives the shipped agent programs against the simulated bricks
in lock-step and checks the verdict plus the files written to disk.
"""

import pytest

from src.lib.nxt_sim import build_world, load_world_spec, run_overrides
from src.models.harness_configuration import HarnessConfiguration
from src.models.scenario_run import ScenarioRun
from src.services.harness import replay_run, run_scenario
from src.services.verdict import max_lateral_deviation


TRACE_FILES = ("poses", "wire", "cycles")


def run_case(project, world, out, **cli):
    """Resolve settings the way the CLI does and run one scenario."""
    spec = load_world_spec(world)
    cli["output_dir"] = str(out)
    run = ScenarioRun.resolve(str(project), str(world), HarnessConfiguration(), run_overrides(spec), cli)
    return run_scenario(run)


def crossing_with_obstacle_after(crossing_world, tmp_path, bar):
    text = crossing_world.read_text(encoding="utf-8").replace("obstacle_after = 2", f"obstacle_after = {bar}")
    path = tmp_path / f"crossing_k{bar}.world"
    path.write_text(text, encoding="utf-8")
    return path


def trace_bytes(directory):
    return {
        str(path.relative_to(directory)): path.read_bytes()
        for folder in TRACE_FILES
        for path in sorted((directory / folder).glob("*"))
    }


@pytest.mark.integration
@pytest.mark.slow
class TestCrossingScenario:
    """Obstacle finder and blind agent crossing the bars."""

    @pytest.mark.parametrize("bar", [1, 2, 3])
    def test_crossing_passes(self, crossing_project, crossing_world, tmp_path, bar):
        """The obstacle after bar K is reported once and avoided by both robots."""
        world = crossing_with_obstacle_after(crossing_world, tmp_path, bar)

        result = run_case(crossing_project, world, tmp_path / "out")

        assert result.verdict.passed, result.verdict.to_text()
        assert result.verdict.get("obstacle_reported_once").measured == f"sends=1,N={bar}"
        assert result.verdict.get("avoid_adopted_at_bar").measured.startswith(f"bar={bar},")

    def test_sync_mode(self, crossing_project, crossing_world, tmp_path):
        result = run_case(crossing_project, crossing_world, tmp_path / "out", mode="sync")

        assert result.verdict.passed, result.verdict.to_text()
        assert all(m.empty_percept_cycles == 0 for m in result.metrics.values())

    def test_async_mode_has_empty_cycles(self, crossing_project, crossing_world, tmp_path):
        result = run_case(crossing_project, crossing_world, tmp_path / "out")

        assert all(m.empty_percept_cycles > 0 for m in result.metrics.values())

    def test_one_shared_message(self, crossing_project, crossing_world, tmp_path):
        """The finder shares its obstacle percept with one agent message."""
        result = run_case(crossing_project, crossing_world, tmp_path / "out")

        assert result.internal_messages == 1
        assert result.verdict.get("sharing_messages").measured == "transport=1,internal=1"

    def test_transport_counts_match_wire_logs(self, crossing_project, crossing_world, tmp_path):
        out = tmp_path / "out"

        result = run_case(crossing_project, crossing_world, out)

        for robot, count in result.transport_messages.items():
            lines = (out / "wire" / f"{robot}.log").read_text(encoding="utf-8").splitlines()
            assert count == len(lines)
            assert count > 0

    def test_reproducible(self, crossing_project, crossing_world, tmp_path):
        """Two runs with the same seed write byte-identical traces."""
        first = tmp_path / "first"
        second = tmp_path / "second"

        run_case(crossing_project, crossing_world, first, seed=7)
        run_case(crossing_project, crossing_world, second, seed=7)

        assert trace_bytes(first) == trace_bytes(second)
        assert (first / "verdict.txt").read_bytes() == (second / "verdict.txt").read_bytes()

    def test_replay_matches_recorded_verdict(self, crossing_project, crossing_world, tmp_path):
        out = tmp_path / "out"
        run_case(crossing_project, crossing_world, out)

        recomputed, recorded = replay_run(out)

        assert [c.to_line() for c in recomputed.criteria] == [c.to_line() for c in recorded.criteria]


@pytest.mark.integration
@pytest.mark.slow
class TestLineFollowerScenario:
    """Line follower on the S-curve track."""

    def test_track_completed(self, linefollower_project, linetrack_world, tmp_path):
        result = run_case(linefollower_project, linetrack_world, tmp_path / "out")

        assert result.verdict.passed, result.verdict.to_text()
        assert result.metrics["linefollower"].uniqueness_violations == 0

    def test_more_latency_more_deviation(self, linefollower_project, linetrack_world, tmp_path):
        """Doubling the transport latency widens the worst lateral deviation."""
        world = build_world(load_world_spec(linetrack_world))

        fast = run_case(linefollower_project, linetrack_world, tmp_path / "fast", latency_ms=40.0, jitter_ms=0.0)
        slow = run_case(linefollower_project, linetrack_world, tmp_path / "slow", latency_ms=80.0, jitter_ms=0.0)

        assert fast.verdict.latency == "40+-0"
        assert (
            max_lateral_deviation(slow.outputs, world, "tracker")
            > max_lateral_deviation(fast.outputs, world, "tracker")
        )


@pytest.mark.integration
class TestEdgeScenarios:
    """Degenerate projects and worlds."""

    def test_project_without_agents(self, tmp_path):
        project = tmp_path / "nobody.mas2j"
        project.write_text("// no agents\n", encoding="utf-8")
        world = tmp_path / "empty.world"
        world.write_text("kind = empty\nname = empty\ncriteria = unique_beliefs\n", encoding="utf-8")

        result = run_case(project, world, tmp_path / "out")

        assert result.end_time_ms == 0
        assert result.verdict.passed
        assert (tmp_path / "out" / "verdict.txt").exists()

    def test_time_limit_stops_run(self, linefollower_project, linetrack_world, tmp_path):
        result = run_case(linefollower_project, linetrack_world, tmp_path / "out", max_time_ms=300)

        assert result.end_time_ms == 300
        assert not result.verdict.get("track_completed").passed
        assert len(result.outputs.poses["tracker"]) == 31
