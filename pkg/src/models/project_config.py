"""ProjectConfig data model: agents, their robots, motors and sensors."""

import re
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, computed_field, field_validator


BTADDRESS_PATTERN = re.compile(r"^[0-9A-Fa-f]{2}(:[0-9A-Fa-f]{2}){5}$")

MOTOR_PORTS = ("a", "b", "c")
SENSOR_PORTS = (1, 2, 3, 4)


class SensorKind(str, Enum):
    """Sensor kinds an NXT port can carry."""
    TOUCH = "touch"
    LIGHT = "light"
    SOUND = "sound"
    ULTRASONIC = "ultrasonic"
    NONE = "none"

    @property
    def percept_functor(self) -> Optional[str]:
        return {
            SensorKind.TOUCH: "touching",
            SensorKind.LIGHT: "light",
            SensorKind.SOUND: "sound",
            SensorKind.ULTRASONIC: "obstacle",
        }.get(self)


class AgentConfig(BaseModel):
    """One agent block of a project file."""

    model_config = {
        "validate_assignment": True,
        "extra": "forbid",
    }

    name: str = Field(pattern=r"^[a-z][A-Za-z0-9_]*$", description="Agent name")
    source_path: str = Field(min_length=1, description="Agent program file")
    btname: str = Field(min_length=1, description="Name of the NXT brick")
    btaddress: str = Field(description="Bluetooth address, 12:34:56:78:90:AB")
    motors: Dict[str, bool] = Field(
        default_factory=lambda: {port: False for port in MOTOR_PORTS},
        description="Connected motors by port letter",
    )
    sensors: Dict[int, SensorKind] = Field(
        default_factory=lambda: {port: SensorKind.NONE for port in SENSOR_PORTS},
        description="Sensor kind by port number",
    )
    sleep_ms: int = Field(default=50, ge=1, le=60000, description="Sampling interval in ms")
    arch_class: Optional[str] = Field(default=None, description="Agent architecture class name")
    belief_base_class: Optional[str] = Field(default=None, description="Belief base class name")
    unique_patterns: List[str] = Field(
        default_factory=list,
        description="Uniqueness patterns such as light(port,_)",
    )

    @field_validator("btaddress")
    @classmethod
    def validate_btaddress(cls, v: str) -> str:
        if not BTADDRESS_PATTERN.match(v):
            raise ValueError("btaddress must look like 12:34:56:78:90:AB")
        return v.upper()

    @field_validator("motors")
    @classmethod
    def validate_motors(cls, v: Dict[str, bool]) -> Dict[str, bool]:
        unknown = set(v) - set(MOTOR_PORTS)
        if unknown:
            raise ValueError(f"unknown motor ports: {sorted(unknown)}")
        return {port: bool(v.get(port, False)) for port in MOTOR_PORTS}

    @field_validator("sensors")
    @classmethod
    def validate_sensors(cls, v: Dict[int, SensorKind]) -> Dict[int, SensorKind]:
        unknown = set(v) - set(SENSOR_PORTS)
        if unknown:
            raise ValueError(f"unknown sensor ports: {sorted(unknown)}")
        return {port: v.get(port, SensorKind.NONE) for port in SENSOR_PORTS}

    @computed_field
    @property
    def connected_motors(self) -> List[str]:
        return [port for port in MOTOR_PORTS if self.motors.get(port)]

    @computed_field
    @property
    def active_sensors(self) -> Dict[int, SensorKind]:
        return {port: kind for port, kind in self.sensors.items() if kind is not SensorKind.NONE}

    def resolve_source(self, base_dir: Optional[Path]) -> Path:
        path = Path(self.source_path)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return path


class ProjectConfig(BaseModel):
    """Parsed project file."""

    model_config = {
        "validate_assignment": True,
        "extra": "forbid",
    }

    agents: List[AgentConfig] = Field(default_factory=list, description="Agents in source order")
    base_dir: Optional[str] = Field(default=None, description="Directory the project file lives in")

    def model_post_init(self, __context: Any) -> None:
        """Agent names and brick names must be unique."""
        names = [agent.name for agent in self.agents]
        if len(names) != len(set(names)):
            raise ValueError("agent names must be unique")
        btnames = [agent.btname for agent in self.agents]
        if len(btnames) != len(set(btnames)):
            raise ValueError("btname values must be unique")

    def get_agent(self, name: str) -> AgentConfig:
        for agent in self.agents:
            if agent.name == name:
                return agent
        raise KeyError(name)

    def source_for(self, agent: AgentConfig) -> Path:
        return agent.resolve_source(Path(self.base_dir) if self.base_dir else None)

    def export_dict(self) -> Dict[str, Any]:
        """Export as a JSON-compatible dictionary."""
        return self.model_dump(mode="json")
