"""ScenarioRun data model: the fully resolved settings of one harness run."""

from typing import Any, Dict, Optional

from pydantic import BaseModel, Field, computed_field, field_validator

from .harness_configuration import HarnessConfiguration

RUN_KEYS = (
    "mode",
    "transport",
    "tick_ms",
    "latency_ms",
    "jitter_ms",
    "action_timeout_ms",
    "seed",
    "max_time_ms",
    "max_depth",
)


class ScenarioRun(BaseModel):
    """Everything a run needs besides the parsed project and world."""

    model_config = {
        "validate_assignment": True,
        "extra": "forbid"
    }

    project_path: str = Field(description="Project (.mas2j) file")
    world_path: str = Field(description="World (.world) file")
    output_dir: str = Field(default="runs/latest", description="Output directory")

    mode: str = Field(default="async", description="Bridge mode: sync or async")
    transport: str = Field(default="inproc", description="inproc or socket")
    free_running: bool = Field(default=False, description="One thread per agent and robot on wall-clock time")
    tick_ms: int = Field(default=10, ge=1, le=50)
    latency_ms: float = Field(default=30.0, ge=0.0)
    jitter_ms: float = Field(default=20.0, ge=0.0)
    action_timeout_ms: int = Field(default=1000, ge=1)
    seed: int = Field(default=42, ge=0)
    max_time_ms: int = Field(default=60000, ge=0)
    max_depth: int = Field(default=256, ge=1)

    record_poses: bool = Field(default=True)
    record_wire: bool = Field(default=True)
    record_cycles: bool = Field(default=True)

    @field_validator("mode")
    @classmethod
    def validate_mode(cls, v: str) -> str:
        v = v.lower()
        if v not in ("sync", "async"):
            raise ValueError("mode must be sync or async")
        return v

    @field_validator("transport")
    @classmethod
    def validate_transport(cls, v: str) -> str:
        v = v.lower()
        if v not in ("inproc", "socket"):
            raise ValueError("transport must be inproc or socket")
        return v

    def model_post_init(self, __context: Any) -> None:
        if self.jitter_ms > self.latency_ms:
            raise ValueError("jitter_ms cannot exceed latency_ms")
        if self.transport == "socket" and not self.free_running:
            raise ValueError("the socket transport needs free-running mode")

    @computed_field
    @property
    def lock_step(self) -> bool:
        """Single-threaded deterministic stepping."""
        return not self.free_running

    @computed_field
    @property
    def latency_text(self) -> str:
        return f"{self.latency_ms:g}+-{self.jitter_ms:g}"

    @classmethod
    def resolve(
        cls,
        project_path: str,
        world_path: str,
        config: Optional[HarnessConfiguration] = None,
        world_overrides: Optional[Dict[str, Any]] = None,
        cli_overrides: Optional[Dict[str, Any]] = None,
    ) -> "ScenarioRun":
        """Merge settings: CLI flag > world file > config (env already applied) > defaults."""
        config = config or HarnessConfiguration()
        values: Dict[str, Any] = {key: getattr(config.run, key) for key in RUN_KEYS}
        values.update(
            output_dir=config.output.directory,
            record_poses=config.output.record_poses,
            record_wire=config.output.record_wire,
            record_cycles=config.output.record_cycles,
        )
        for overrides in (world_overrides or {}, cli_overrides or {}):
            values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(project_path=str(project_path), world_path=str(world_path), **values)

    def export_dict(self) -> Dict[str, Any]:
        """Export as a JSON-compatible dictionary, computed fields excluded."""
        return self.model_dump(mode="json", exclude={"lock_step", "latency_text"})
