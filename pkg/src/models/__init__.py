"""Data models for the NXT agent runtime."""

from .cycle_report import AgentMetrics, CycleReport
from .harness_configuration import HarnessConfiguration, LoggingSettings, OutputSettings, RunDefaults
from .project_config import AgentConfig, ProjectConfig, SensorKind
from .run_verdict import CriterionResult, RunVerdict
from .scenario_run import ScenarioRun
from .world_spec import RobotPlacement, WorldKind, WorldSpec

__all__ = [
    "AgentConfig",
    "AgentMetrics",
    "CriterionResult",
    "CycleReport",
    "HarnessConfiguration",
    "LoggingSettings",
    "OutputSettings",
    "ProjectConfig",
    "RobotPlacement",
    "RunDefaults",
    "RunVerdict",
    "ScenarioRun",
    "SensorKind",
    "WorldKind",
    "WorldSpec",
]
