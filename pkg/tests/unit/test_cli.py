"""Unit tests for the command line."""

import importlib

import pytest

from src.cli.main import EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, cli_overrides, create_parser, main
from src.lib.asl_parser import parse_agent_program, roundtrip_print
from src.lib.config import ConfigurationError


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("logging:\n  level: WARNING\n", encoding="utf-8")
    return str(path)


@pytest.mark.unit
class TestParseCommand:
    """Test `parse` on agent programs."""

    def test_valid_program(self, config_file, scenarios_dir, capsys):
        code = main(["--config", config_file, "parse", str(scenarios_dir / "linefollower.asl")])

        out = capsys.readouterr().out
        assert code == EXIT_PASS
        assert "✅" in out
        assert "5 plans" in out
        assert "1. +!move" in out

    def test_print_renders_program(self, config_file, scenarios_dir, capsys):
        source = scenarios_dir / "blindagent.asl"

        code = main(["--config", config_file, "parse", str(source), "--print"])

        expected = roundtrip_print(parse_agent_program(source.read_text(encoding="utf-8")), multiline=True)
        assert code == EXIT_PASS
        assert capsys.readouterr().out == expected

    def test_syntax_error(self, config_file, tmp_path, capsys):
        broken = tmp_path / "broken.asl"
        broken.write_text("+!go <- act(1.\n", encoding="utf-8")

        code = main(["--config", config_file, "parse", str(broken)])

        assert code == EXIT_CONFIG
        assert "line 1, column 14" in capsys.readouterr().err

    def test_missing_file(self, config_file, tmp_path):
        assert main(["--config", config_file, "parse", str(tmp_path / "absent.asl")]) == EXIT_CONFIG


@pytest.mark.unit
class TestRunCommand:
    """Test `run` argument handling and exit codes."""

    def test_no_command(self, capsys):
        assert main([]) == EXIT_CONFIG

    def test_missing_world(self, config_file, linefollower_project, tmp_path):
        code = main(["--config", config_file, "run", str(linefollower_project), str(tmp_path / "absent.world")])

        assert code == EXIT_CONFIG

    def test_bad_latency(self, config_file, linefollower_project, linetrack_world, tmp_path):
        code = main([
            "--config", config_file, "run", str(linefollower_project), str(linetrack_world),
            "--latency", "fast", "--out", str(tmp_path / "out"),
        ])

        assert code == EXIT_CONFIG
        assert not (tmp_path / "out").exists()

    def test_mismatched_project_and_world(self, config_file, crossing_project, linetrack_world, tmp_path, capsys):
        code = main([
            "--config", config_file, "run", str(crossing_project), str(linetrack_world),
            "--out", str(tmp_path / "out"),
        ])

        assert code == EXIT_CONFIG
        assert "has no placement" in capsys.readouterr().err

    def test_missing_config_file(self, linefollower_project, linetrack_world, tmp_path):
        code = main([
            "--config", str(tmp_path / "absent.yaml"), "run", str(linefollower_project), str(linetrack_world),
        ])

        assert code == EXIT_CONFIG

    def test_short_run_fails_and_replays(self, config_file, linefollower_project, linetrack_world, tmp_path, capsys):
        """A run cut off early writes its outputs and fails track_completed."""
        out = tmp_path / "out"

        code = main([
            "--config", config_file, "run", str(linefollower_project), str(linetrack_world),
            "--max-time", "200", "--out", str(out),
        ])

        assert code == EXIT_FAIL
        assert "❌ FAIL track_completed" in capsys.readouterr().out
        assert (out / "verdict.txt").exists()
        assert main(["--config", config_file, "replay", str(out)]) == EXIT_FAIL

    def test_replay_empty_directory(self, config_file, tmp_path):
        assert main(["--config", config_file, "replay", str(tmp_path)]) == EXIT_CONFIG


@pytest.mark.unit
class TestCliOverrides:
    """Test mapping flags to run settings."""

    def parse(self, *extra):
        return create_parser().parse_args(["run", "p.mas2j", "w.world", *extra])

    def test_unset_flags_are_none(self):
        overrides = cli_overrides(self.parse())

        assert overrides["mode"] is None
        assert overrides["free_running"] is None
        assert "latency_ms" not in overrides

    def test_latency_forms(self):
        assert cli_overrides(self.parse("--latency", "60±40"))["jitter_ms"] == 40.0
        assert cli_overrides(self.parse("--latency", "80"))["latency_ms"] == 80.0

    def test_socket_implies_free_running(self):
        assert cli_overrides(self.parse("--transport", "socket"))["free_running"] is True

    def test_bad_latency(self):
        with pytest.raises(ConfigurationError):
            cli_overrides(self.parse("--latency", "-5"))


@pytest.mark.unit
class TestRunSettings:
    """Test the settings `run` hands to the harness."""

    def test_precedence(self, mocker, monkeypatch, config_file, crossing_project, crossing_world, tmp_path):
        monkeypatch.setenv("NXT_AGENTS_SEED", "9")
        monkeypatch.setenv("NXT_AGENTS_MODE", "sync")
        run_scenario = mocker.patch.object(importlib.import_module("src.cli.main"), "run_scenario")

        code = main([
            "--config", config_file, "run", str(crossing_project), str(crossing_world),
            "--seed", "5", "--out", str(tmp_path / "out"),
        ])

        run = run_scenario.call_args.args[0]
        assert code == EXIT_PASS
        assert run.seed == 5
        assert run.mode == "sync"
        assert run.max_time_ms == 95000
        assert run.output_dir == str(tmp_path / "out")
