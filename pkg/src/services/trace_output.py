"""TraceStorage service: write a run's outputs to its directory and load them back.

Layout under the output directory:

    run.yaml                resolved settings, world spec, robot table, totals
    poses/<robot>.trace     "time_ms x y heading" per tick
    wire/<robot>.log        "time_ms dir record" per transport message
    cycles/<agent>.log      one JSON CycleReport per line
    verdict.txt             "PASS|FAIL name measured" per criterion, then a summary
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import structlog
import yaml

from ..models.cycle_report import CycleReport
from ..models.run_verdict import CriterionResult, RunVerdict
from ..models.scenario_run import ScenarioRun
from ..models.world_spec import WorldSpec
from .verdict import RobotRecord, ScenarioOutputs

logger = structlog.get_logger(__name__)

POSE_HEADER = "# time_ms x_mm y_mm heading_rad"


class TraceStorageError(Exception):
    """A run directory is missing files or holds unreadable ones."""


def round_pose(time_ms: int, x: float, y: float, heading: float) -> Tuple[int, float, float, float]:
    """Round to the precision written to disk so reloaded traces compare equal."""
    return (time_ms, round(x, 3), round(y, 3), round(heading, 6))


class TraceStorage:
    """File-based storage for one run directory."""

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)

    # writing

    def write_outputs(
        self,
        outputs: ScenarioOutputs,
        metrics: Optional[Dict[str, Any]] = None,
    ) -> None:
        run = outputs.run
        self.directory.mkdir(parents=True, exist_ok=True)
        self.write_run(outputs, metrics or {})
        if run.record_poses:
            for robot, poses in outputs.poses.items():
                self.write_poses(robot, poses)
        if run.record_wire:
            for robot, entries in outputs.wire.items():
                self.write_wire(robot, entries)
        if run.record_cycles:
            for agent, reports in outputs.cycles.items():
                self.write_cycles(agent, reports)
        logger.info("Run outputs written", directory=str(self.directory))

    def write_run(self, outputs: ScenarioOutputs, metrics: Dict[str, Any]) -> Path:
        data = {
            "run": outputs.run.export_dict(),
            "world": outputs.world_spec.export_dict(),
            "robots": {
                robot: {
                    "agent": record.agent,
                    "radius": record.radius,
                    "light_mounts": [list(m) for m in record.light_mounts],
                }
                for robot, record in outputs.robots.items()
            },
            "metrics": metrics,
        }
        path = self.directory / "run.yaml"
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)
        return path

    def write_poses(self, robot: str, poses: np.ndarray) -> Path:
        path = self._file("poses", f"{robot}.trace")
        with open(path, "w", encoding="utf-8") as f:
            f.write(POSE_HEADER + "\n")
            for t, x, y, heading in poses:
                f.write(f"{int(t)} {x:.3f} {y:.3f} {heading:.6f}\n")
        return path

    def write_wire(self, robot: str, entries: List[Tuple[int, str, str]]) -> Path:
        path = self._file("wire", f"{robot}.log")
        with open(path, "w", encoding="utf-8") as f:
            for t, direction, record in entries:
                f.write(f"{t} {direction} {record}\n")
        return path

    def write_cycles(self, agent: str, reports: List[CycleReport]) -> Path:
        path = self._file("cycles", f"{agent}.log")
        with open(path, "w", encoding="utf-8") as f:
            for report in reports:
                f.write(json.dumps(report.export_dict()) + "\n")
        return path

    def write_verdict(self, verdict: RunVerdict) -> Path:
        path = self.directory / "verdict.txt"
        self.directory.mkdir(parents=True, exist_ok=True)
        path.write_text(verdict.to_text(), encoding="utf-8")
        return path

    def _file(self, folder: str, name: str) -> Path:
        target = self.directory / folder
        target.mkdir(parents=True, exist_ok=True)
        return target / name

    # loading

    def load_outputs(self) -> ScenarioOutputs:
        """Reload everything `write_outputs` wrote."""
        data = self.load_run()
        try:
            run = ScenarioRun(**data["run"])
            world_spec = WorldSpec(**data["world"])
            robots = {
                robot: RobotRecord(
                    agent=entry["agent"],
                    radius=float(entry.get("radius", world_spec.robot_radius)),
                    light_mounts=[tuple(m) for m in entry.get("light_mounts", [])],
                )
                for robot, entry in (data.get("robots") or {}).items()
            }
        except (KeyError, TypeError, ValueError) as e:
            raise TraceStorageError(f"run.yaml is not a run description: {e}") from e

        poses = {robot: self.load_poses(robot) for robot in robots if (self.directory / "poses" / f"{robot}.trace").exists()}
        wire = {robot: self.load_wire(robot) for robot in robots if (self.directory / "wire" / f"{robot}.log").exists()}
        cycles = {
            record.agent: self.load_cycles(record.agent)
            for record in robots.values()
            if (self.directory / "cycles" / f"{record.agent}.log").exists()
        }
        return ScenarioOutputs(run=run, world_spec=world_spec, robots=robots, poses=poses, wire=wire, cycles=cycles)

    def load_run(self) -> Dict[str, Any]:
        path = self.directory / "run.yaml"
        if not path.exists():
            raise TraceStorageError(f"no run.yaml in {self.directory}")
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise TraceStorageError(f"run.yaml: {e}") from e
        if not isinstance(data, dict):
            raise TraceStorageError("run.yaml must contain a mapping")
        return data

    def load_poses(self, robot: str) -> np.ndarray:
        path = self.directory / "poses" / f"{robot}.trace"
        rows = np.loadtxt(path, comments="#", ndmin=2)
        return rows.reshape(-1, 4)

    def load_wire(self, robot: str) -> List[Tuple[int, str, str]]:
        entries = []
        path = self.directory / "wire" / f"{robot}.log"
        for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            parts = line.split(" ", 2)
            if len(parts) != 3:
                raise TraceStorageError(f"{path}:{number}: expected 'time dir record'")
            entries.append((int(parts[0]), parts[1], parts[2]))
        return entries

    def load_cycles(self, agent: str) -> List[CycleReport]:
        path = self.directory / "cycles" / f"{agent}.log"
        reports = []
        for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                reports.append(CycleReport(**json.loads(line)))
            except (json.JSONDecodeError, ValueError) as e:
                raise TraceStorageError(f"{path}:{number}: {e}") from e
        return reports

    def load_verdict(self) -> Optional[RunVerdict]:
        """The verdict.txt written at run time, criteria only."""
        path = self.directory / "verdict.txt"
        if not path.exists():
            return None
        criteria = [
            line for line in path.read_text(encoding="utf-8").splitlines()
            if line and not line.startswith("#")
        ]
        return RunVerdict(scenario=self.directory.name, criteria=[CriterionResult.from_line(line) for line in criteria])
