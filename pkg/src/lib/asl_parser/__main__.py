"""
CLI Interface for the Agent Source Parser.

Syntax-checks agent programs and project files and prints what was parsed.
"""

import argparse
import logging
import sys
from pathlib import Path

from . import AslSyntaxError, ProjectFileError, load_project_file, parse_agent_program, roundtrip_print

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def check_program(path: Path, show_source: bool) -> bool:
    try:
        program = parse_agent_program(path.read_text(encoding="utf-8"))
    except OSError as e:
        print(f"❌ Cannot read {path}: {e}")
        return False
    except AslSyntaxError as e:
        print(f"❌ {path}: {e}")
        return False

    summary = program.summary()
    print(f"✅ {path}: " + ", ".join(f"{count} {kind}" for kind, count in summary.items()))
    if show_source:
        print(roundtrip_print(program, multiline=True), end="")
    else:
        for index, plan in enumerate(program.plans, start=1):
            print(f"   {index}. {plan}")
    return True


def check_project(path: Path) -> bool:
    try:
        project = load_project_file(path)
    except ProjectFileError as e:
        print(f"❌ {path}: {e}")
        return False

    print(f"✅ {path}: {len(project.agents)} agent(s)")
    for agent in project.agents:
        sensors = ", ".join(f"{port}={kind.value}" for port, kind in agent.active_sensors.items())
        print(f"   {agent.name} -> {agent.btname} motors={''.join(agent.connected_motors)} "
              f"sensors=[{sensors}] sleep={agent.sleep_ms}ms")
    return True


def main():
    """Main CLI entry point."""
    parser = argparse.ArgumentParser(
        description="Agent source and project file checker",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument('files', nargs='+', type=Path, help='.asl or .mas2j files')
    parser.add_argument('--print', dest='show_source', action='store_true',
                        help='Print the re-rendered program')
    parser.add_argument('--debug', action='store_true', help='Enable debug logging')

    args = parser.parse_args()

    if args.debug:
        logging.getLogger().setLevel(logging.DEBUG)

    ok = True
    for path in args.files:
        if path.suffix == ".mas2j":
            ok = check_project(path) and ok
        else:
            ok = check_program(path, args.show_source) and ok
    sys.exit(0 if ok else 2)


if __name__ == '__main__':
    main()
