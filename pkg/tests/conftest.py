"""Pytest configuration and fixtures."""

import pytest
import sys
from pathlib import Path

import structlog

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

SCENARIOS = Path(__file__).parent.parent / "scenarios"


@pytest.fixture(autouse=True)
def reset_logging():
    """Undo structlog configuration done by CLI tests."""
    yield
    structlog.reset_defaults()


@pytest.fixture
def scenarios_dir():
    return SCENARIOS


@pytest.fixture
def linefollower_project():
    return SCENARIOS / "linefollower.mas2j"


@pytest.fixture
def crossing_project():
    return SCENARIOS / "crossing.mas2j"


@pytest.fixture
def linetrack_world():
    return SCENARIOS / "linetrack.world"


@pytest.fixture
def crossing_world():
    return SCENARIOS / "crossing.world"


@pytest.fixture
def asl_source():
    """Read one of the shipped agent programs by stem."""
    def read(name: str) -> str:
        return (SCENARIOS / f"{name}.asl").read_text(encoding="utf-8")
    return read
