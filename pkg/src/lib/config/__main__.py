"""Command-line interface for configuration management.

Usage:
    python -m src.lib.config [COMMAND] [OPTIONS]

Commands:
    show        - Print the merged configuration (defaults, file, environment)
    validate    - Validate a configuration file
    project     - Check a project file against a world file and its programs
    create      - Write a default configuration file

Examples:
    python -m src.lib.config show
    python -m src.lib.config validate config.yaml
    python -m src.lib.config project scenarios/crossing.mas2j scenarios/crossing.world
"""

import argparse
import json
import sys
from pathlib import Path

# Add project root to path for imports
project_root = Path(__file__).parent.parent.parent.parent
sys.path.insert(0, str(project_root))

from src.lib.asl_parser import AslSyntaxError, ProjectFileError, load_project_file, parse_agent_program
from src.lib.config import ConfigManager, ConfigurationError, ConfigValidator
from src.lib.nxt_sim import WorldSpecError, load_world_spec


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="NXT Agent Harness Configuration Management",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Show warnings and info")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    show_parser = subparsers.add_parser("show", help="Print the merged configuration")
    show_parser.add_argument("config_file", nargs="?", default="config.yaml", help="Configuration file")
    show_parser.add_argument("--json", action="store_true", help="Print JSON instead of YAML")

    validate_parser = subparsers.add_parser("validate", help="Validate configuration file")
    validate_parser.add_argument("config_file", nargs="?", default="config.yaml", help="Configuration file")
    validate_parser.add_argument("--strict", action="store_true", help="Treat questionable values as errors")

    project_parser = subparsers.add_parser("project", help="Check project against world and programs")
    project_parser.add_argument("project_file", help="Project (.mas2j) file")
    project_parser.add_argument("world_file", help="World (.world) file")

    create_parser = subparsers.add_parser("create", help="Write a default configuration file")
    create_parser.add_argument("--output", "-o", default="config.yaml", help="Output file")
    create_parser.add_argument("--force", action="store_true", help="Overwrite an existing file")

    return parser


def cmd_show(args) -> int:
    manager = ConfigManager(args.config_file, required=False)
    config = manager.load_config()
    if args.json:
        print(json.dumps(config.export_dict(), indent=2))
    else:
        print(manager.export_config_yaml(), end="")
    return 0


def cmd_validate(args) -> int:
    result = ConfigValidator(strict_mode=args.strict).validate_yaml_file(args.config_file)
    result.print_results(verbose=args.verbose)
    return 0 if result.is_valid else 1


def cmd_project(args) -> int:
    try:
        project = load_project_file(args.project_file)
        world = load_world_spec(args.world_file)
        programs = {}
        for agent in project.agents:
            source = project.source_for(agent)
            programs[agent.name] = parse_agent_program(source.read_text(encoding="utf-8"))
    except (ProjectFileError, WorldSpecError, AslSyntaxError, OSError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return 2

    result = ConfigValidator().validate_project(project, world, programs)
    result.print_results(verbose=args.verbose)
    return 0 if result.is_valid else 1


def cmd_create(args) -> int:
    output = Path(args.output)
    if output.exists() and not args.force:
        print(f"❌ {output} exists (use --force to overwrite)", file=sys.stderr)
        return 1
    manager = ConfigManager(output, required=False, load_env_file=False)
    manager.save_config(manager.load_config())
    print(f"✅ Created: {output}")
    return 0


def main() -> int:
    parser = create_parser()
    args = parser.parse_args()

    if not args.command:
        parser.print_help()
        return 1

    commands = {
        "show": cmd_show,
        "validate": cmd_validate,
        "project": cmd_project,
        "create": cmd_create,
    }

    try:
        return commands[args.command](args)
    except ConfigurationError as e:
        print(f"❌ {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print("\nOperation cancelled by user")
        return 1


if __name__ == "__main__":
    sys.exit(main())
