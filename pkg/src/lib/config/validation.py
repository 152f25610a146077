"""Configuration validation for config.yaml and for project/world pairings.

Harness settings are checked against the pydantic model plus a few
consistency rules; a project file is checked against the world it will
run in and the agent programs it names (robots, motors, sensor mounts).
"""

from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Set, Union

import yaml
from pydantic import ValidationError

from ...models.harness_configuration import HarnessConfiguration
from ...models.project_config import ProjectConfig, SensorKind
from ...models.world_spec import WorldSpec
from ..asl_parser import Action, AgentProgram
from ..bridge.wire import ACTION_VERBS
from ..terms import Atom, ListTerm, Structure, functor_of, strip_annots


class ConfigValidationError(Exception):
    """Custom exception for configuration validation errors."""

    def __init__(self, message: str, path: str = "", details: Optional[Dict] = None):
        self.message = message
        self.path = path
        self.details = details or {}
        super().__init__(self.message)

    def __str__(self) -> str:
        if self.path:
            return f"Config validation error at '{self.path}': {self.message}"
        return f"Config validation error: {self.message}"


class ValidationResult:
    """Result of configuration validation."""

    def __init__(self):
        self.is_valid = True
        self.errors: List[ConfigValidationError] = []
        self.warnings: List[str] = []
        self.info: List[str] = []

    def add_error(self, error: ConfigValidationError) -> None:
        self.errors.append(error)
        self.is_valid = False

    def add_warning(self, message: str, path: str = "") -> None:
        warning_msg = f"Warning at '{path}': {message}" if path else f"Warning: {message}"
        self.warnings.append(warning_msg)

    def add_info(self, message: str) -> None:
        self.info.append(message)

    def get_summary(self) -> Dict[str, Any]:
        return {
            "valid": self.is_valid,
            "error_count": len(self.errors),
            "warning_count": len(self.warnings),
            "info_count": len(self.info),
            "errors": [str(error) for error in self.errors],
            "warnings": self.warnings,
            "info": self.info
        }

    def print_results(self, verbose: bool = True) -> None:
        """Print validation results to console."""
        if self.is_valid:
            print("✓ Configuration validation passed")
        else:
            print("✗ Configuration validation failed")

        if self.errors:
            print(f"\nErrors ({len(self.errors)}):")
            for error in self.errors:
                print(f"  • {error}")

        if self.warnings and verbose:
            print(f"\nWarnings ({len(self.warnings)}):")
            for warning in self.warnings:
                print(f"  • {warning}")

        if self.info and verbose:
            print(f"\nInfo ({len(self.info)}):")
            for info in self.info:
                print(f"  • {info}")


def motors_driven(program: AgentProgram) -> Set[str]:
    """Lower-case motor names appearing in the program's robot actions."""
    motors: Set[str] = set()
    for plan in program.plans:
        for step in plan.body:
            if not isinstance(step, Action):
                continue
            term = strip_annots(step.term)
            if functor_of(term)[0] not in ACTION_VERBS or not isinstance(term, Structure):
                continue
            first = term.args[0]
            if isinstance(first, ListTerm):
                motors.update(item.name.lower() for item in first.items if isinstance(item, Atom))
    return motors


class ConfigValidator:
    """Validator for harness settings and for project/world/program consistency."""

    def __init__(self, strict_mode: bool = False):
        self.strict_mode = strict_mode
        self.result = ValidationResult()

    def validate_config(self, config_data: Dict[str, Any]) -> ValidationResult:
        """Validate a harness configuration dictionary."""
        self.result = ValidationResult()

        if not isinstance(config_data, dict):
            self.result.add_error(ConfigValidationError("Configuration must be a mapping"))
            return self.result

        for section in ("run", "output", "logging"):
            if section not in config_data:
                self.result.add_info(f"Section '{section}' not set, using defaults")

        try:
            config = HarnessConfiguration(**config_data)
        except ValidationError as e:
            for error in e.errors():
                path = ".".join(str(part) for part in error.get("loc", ()))
                self.result.add_error(ConfigValidationError(error.get("msg", "invalid value"), path))
            return self.result
        except ValueError as e:
            self.result.add_error(ConfigValidationError(str(e)))
            return self.result

        run = config.run
        if run.tick_ms > run.latency_ms - run.jitter_ms and run.latency_ms > 0:
            self.result.add_warning(
                "tick longer than the minimum latency; deliveries are quantized to ticks", "run.tick_ms"
            )
        if run.max_time_ms == 0:
            message = "max_time_ms is 0; runs stop before the first tick"
            if self.strict_mode:
                self.result.add_error(ConfigValidationError(message, "run.max_time_ms"))
            else:
                self.result.add_warning(message, "run.max_time_ms")
        return self.result

    def validate_yaml_file(self, file_path: Union[str, Path]) -> ValidationResult:
        """Validate a YAML harness configuration file."""
        self.result = ValidationResult()
        file_path = Path(file_path)
        if not file_path.exists():
            self.result.add_error(ConfigValidationError(f"Configuration file does not exist: {file_path}"))
            return self.result
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            self.result.add_error(ConfigValidationError(f"YAML parsing error: {e}"))
            return self.result
        return self.validate_config(data)

    def validate_project(
        self,
        project: ProjectConfig,
        world: WorldSpec,
        programs: Optional[Mapping[str, AgentProgram]] = None,
    ) -> ValidationResult:
        """Check every agent maps to a placed robot with the motors and sensors it uses."""
        self.result = ValidationResult()
        programs = programs or {}

        if not project.agents:
            self.result.add_info("Project has no agents")

        for agent in project.agents:
            path = f"{agent.name}"
            if world.robots and agent.btname not in world.robots:
                self.result.add_error(ConfigValidationError(
                    f"robot '{agent.btname}' has no placement in world '{world.name}'", path
                ))
            elif not world.robots:
                self.result.add_warning(f"robot '{agent.btname}' starts at the origin", path)

            program = programs.get(agent.name)
            if program is not None:
                for motor in sorted(motors_driven(program)):
                    if not agent.motors.get(motor, False):
                        self.result.add_error(ConfigValidationError(
                            f"program drives motor {motor} which is not connected", f"{path}.motor{motor}"
                        ))

            placement = world.placement(agent.btname)
            for port in sorted(placement.mounts):
                kind = agent.sensors.get(port, SensorKind.NONE)
                if kind is SensorKind.NONE:
                    self.result.add_warning(f"mount given for unconfigured sensor port {port}", f"{path}.sensor{port}")
            for port, kind in sorted(agent.active_sensors.items()):
                if kind is SensorKind.LIGHT and port not in placement.mounts and port > 2:
                    self.result.add_warning(
                        f"light sensor on port {port} uses the centre mount", f"{path}.sensor{port}"
                    )

        if world.kind.value == "crossing" and len(project.agents) > 0:
            self.result.add_info(
                f"Obstacle after bar {world.obstacle_after} of {world.bar_count}, near face at x={world.obstacle_x:g}"
            )
        return self.result


def generate_example_config() -> Dict[str, Any]:
    """The default configuration as a plain dictionary."""
    return HarnessConfiguration().export_dict()
