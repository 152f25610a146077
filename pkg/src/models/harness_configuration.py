"""HarnessConfiguration data model: defaults for scenario runs, outputs and logging."""

from typing import Any, Dict

from pydantic import BaseModel, Field, computed_field, field_validator

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class RunDefaults(BaseModel):
    """Run tunables used when neither the world file nor the CLI sets them."""

    model_config = {
        "validate_assignment": True,
        "extra": "forbid"
    }

    mode: str = Field(default="async", description="Bridge mode: sync or async")
    transport: str = Field(default="inproc", description="inproc (simulated latency) or socket")
    tick_ms: int = Field(default=10, ge=1, le=50, description="Simulation tick in milliseconds")
    latency_ms: float = Field(default=30.0, ge=0.0, le=5000.0, description="Mean one-way transport latency")
    jitter_ms: float = Field(default=20.0, ge=0.0, le=5000.0, description="Uniform latency jitter")
    action_timeout_ms: int = Field(default=1000, ge=1, le=60000, description="Sync-mode ACK timeout")
    seed: int = Field(default=42, ge=0, description="Root seed for every random stream")
    max_time_ms: int = Field(default=60000, ge=0, description="Simulated time limit")
    max_depth: int = Field(default=256, ge=1, le=10000, description="Rule resolution depth cap")

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


class OutputSettings(BaseModel):
    """Where run outputs go and which recorders are on."""

    model_config = {
        "validate_assignment": True,
        "extra": "forbid"
    }

    directory: str = Field(default="runs/latest", min_length=1, description="Output directory")
    record_poses: bool = Field(default=True, description="Write poses/<robot>.trace")
    record_wire: bool = Field(default=True, description="Write wire/<robot>.log")
    record_cycles: bool = Field(default=True, description="Write cycles/<agent>.log")


class LoggingSettings(BaseModel):
    model_config = {
        "validate_assignment": True,
        "extra": "forbid"
    }

    level: str = Field(default="INFO", description="DEBUG, INFO, WARNING or ERROR")

    @field_validator("level")
    @classmethod
    def validate_level(cls, v: str) -> str:
        v = v.upper()
        if v not in LOG_LEVELS:
            raise ValueError(f"log level must be one of {', '.join(LOG_LEVELS)}")
        return v


class HarnessConfiguration(BaseModel):
    """Complete harness configuration as read from config.yaml."""

    model_config = {
        "validate_assignment": True,
        "extra": "forbid",
        "json_schema_extra": {
            "example": {
                "run": {"mode": "async", "tick_ms": 10, "latency_ms": 30, "jitter_ms": 20},
                "output": {"directory": "runs/latest"},
                "logging": {"level": "INFO"}
            }
        }
    }

    run: RunDefaults = Field(default_factory=RunDefaults, description="Run defaults")
    output: OutputSettings = Field(default_factory=OutputSettings, description="Output settings")
    logging: LoggingSettings = Field(default_factory=LoggingSettings, description="Log settings")

    @computed_field
    @property
    def latency_text(self) -> str:
        """Latency as accepted by `run --latency`."""
        return f"{self.run.latency_ms:g}+-{self.run.jitter_ms:g}"

    def export_dict(self) -> Dict[str, Any]:
        """Export configuration as dictionary for YAML/JSON serialization."""
        return self.model_dump(mode="json", exclude={"latency_text"})
