"""Top-level command line: run scenarios, check agent programs, replay runs."""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import structlog

from ..lib.asl_parser import AslSyntaxError, parse_agent_program, roundtrip_print
from ..lib.bridge import LatencyModel
from ..lib.config import ENV_PREFIX, ConfigManager, ConfigurationError
from ..lib.nxt_sim import WorldSpecError, load_world_spec, run_overrides
from ..models.run_verdict import RunVerdict
from ..models.scenario_run import ScenarioRun
from ..services.harness import ScenarioError, replay_run, run_scenario
from ..services.trace_output import TraceStorageError

logger = structlog.get_logger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def configure_logging(level: str) -> None:
    """Route structlog through a console renderer at the given level."""
    numeric = getattr(logging, level.upper(), logging.INFO)
    logging.basicConfig(
        level=numeric,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="%H:%M:%S"),
            structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty()),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harness-cli",
        description="AgentSpeak agents driving simulated Lego NXT robots",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py run scenarios/linefollower.mas2j scenarios/linetrack.world
  python main.py run scenarios/crossing.mas2j scenarios/crossing.world --mode sync --seed 7
  python main.py run scenarios/crossing.mas2j scenarios/crossing.world --latency 60+-40
  python main.py parse scenarios/blindagent.asl --print
  python main.py replay runs/latest

Exit codes: 0 every criterion passed, 1 a criterion failed, 2 configuration error.
        """
    )
    parser.add_argument("--config", default="config.yaml", help="Harness configuration file")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    run_parser = subparsers.add_parser("run", help="Run a scenario and write its outputs")
    run_parser.add_argument("project", help="Project (.mas2j) file")
    run_parser.add_argument("world", help="World (.world) file")
    run_parser.add_argument("--mode", choices=("sync", "async"), help="Bridge mode")
    run_parser.add_argument("--seed", type=int, help="Root random seed")
    run_parser.add_argument("--tick", type=int, help="Simulation tick in ms")
    run_parser.add_argument("--latency", help="Transport latency, MS or MS+-J (also MS±J)")
    run_parser.add_argument("--max-time", type=int, dest="max_time", help="Simulated time limit in ms")
    run_parser.add_argument("--out", help="Output directory")
    run_parser.add_argument("--transport", choices=("inproc", "socket"), help="Link between agent and brick")
    run_parser.add_argument("--free-running", action="store_true", dest="free_running",
                            help="Threads on wall-clock time instead of lock-step")

    parse_parser = subparsers.add_parser("parse", help="Syntax-check an agent program")
    parse_parser.add_argument("source", type=Path, help="Agent program (.asl)")
    parse_parser.add_argument("--print", dest="show_source", action="store_true",
                              help="Print the re-rendered program")

    replay_parser = subparsers.add_parser("replay", help="Recompute the verdict of a finished run")
    replay_parser.add_argument("directory", type=Path, help="Run output directory")

    return parser


def cli_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {
        "mode": args.mode,
        "seed": args.seed,
        "tick_ms": args.tick,
        "max_time_ms": args.max_time,
        "output_dir": args.out,
        "transport": args.transport,
        "free_running": True if args.free_running or args.transport == "socket" else None,
    }
    if args.latency is not None:
        try:
            model = LatencyModel.parse(args.latency)
        except ValueError as e:
            raise ConfigurationError(str(e)) from e
        overrides.update(latency_ms=model.latency_ms, jitter_ms=model.jitter_ms)
    return overrides


def print_verdict(verdict: RunVerdict) -> None:
    for criterion in verdict.criteria:
        mark = "✅" if criterion.passed else "❌"
        print(f"{mark} {criterion.to_line()}")
    print(verdict.summary_line())


def cmd_run(args: argparse.Namespace, config_manager: ConfigManager) -> int:
    config = config_manager.load_config()
    try:
        world_spec = load_world_spec(args.world)
    except (WorldSpecError, OSError) as e:
        raise ScenarioError(str(e), args.world) from e
    try:
        run = ScenarioRun.resolve(args.project, args.world, config, run_overrides(world_spec), cli_overrides(args))
    except ValueError as e:
        raise ConfigurationError(f"Invalid run settings: {e}") from e

    logger.info("Starting scenario", project=args.project, world=args.world, mode=run.mode,
                seed=run.seed, latency=run.latency_text, output=run.output_dir)
    result = run_scenario(run)
    print_verdict(result.verdict)
    print(f"Outputs written to {result.output_dir}")
    return EXIT_PASS if result.verdict.passed else EXIT_FAIL


def cmd_parse(args: argparse.Namespace) -> int:
    try:
        program = parse_agent_program(args.source.read_text(encoding="utf-8"))
    except OSError as e:
        print(f"❌ Cannot read {args.source}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except AslSyntaxError as e:
        print(f"❌ {args.source}: {e}", file=sys.stderr)
        return EXIT_CONFIG

    if args.show_source:
        print(roundtrip_print(program, multiline=True), end="")
        return EXIT_PASS
    print(f"✅ {args.source}: " + ", ".join(f"{count} {kind}" for kind, count in program.summary().items()))
    for index, plan in enumerate(program.plans, start=1):
        print(f"   {index}. {plan}")
    return EXIT_PASS


def cmd_replay(args: argparse.Namespace) -> int:
    recomputed, recorded = replay_run(args.directory)
    print_verdict(recomputed)
    if recorded is not None:
        before = [c.to_line() for c in recorded.criteria]
        after = [c.to_line() for c in recomputed.criteria]
        if before != after:
            logger.warning("Recomputed verdict differs from verdict.txt", directory=str(args.directory))
    return EXIT_PASS if recomputed.passed else EXIT_FAIL


def log_level_for(args: argparse.Namespace, config_manager: ConfigManager) -> str:
    if args.debug:
        return "DEBUG"
    env_level = os.getenv(f"{ENV_PREFIX}LOG_LEVEL")
    if env_level:
        return env_level
    try:
        return config_manager.load_config().logging.level
    except ConfigurationError:
        return "INFO"


def main(argv: Optional[list] = None) -> int:
    parser = create_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_CONFIG

    config_manager = ConfigManager(args.config, required=args.config != "config.yaml" or Path(args.config).exists())
    configure_logging(log_level_for(args, config_manager))

    try:
        if args.command == "run":
            return cmd_run(args, config_manager)
        if args.command == "parse":
            return cmd_parse(args)
        return cmd_replay(args)
    except (ConfigurationError, ScenarioError, TraceStorageError) as e:
        logger.error("Configuration error", error=str(e))
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        print("\nOperation cancelled by user")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
