"""RunVerdict data model: per-criterion results of a scenario run."""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, computed_field, field_validator


class CriterionResult(BaseModel):
    """One acceptance criterion with the value it was judged on."""

    model_config = {
        "validate_assignment": True,
        "extra": "forbid"
    }

    name: str = Field(min_length=1, description="Criterion name")
    passed: bool = Field(description="Whether the criterion held")
    measured: str = Field(default="-", description="Measured value(s), no spaces")
    detail: str = Field(default="", description="Human-readable explanation")

    @field_validator("name", "measured")
    @classmethod
    def validate_token(cls, v: str) -> str:
        if any(ch.isspace() for ch in v):
            raise ValueError("must not contain whitespace")
        return v

    def to_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name} {self.measured}"

    @classmethod
    def from_line(cls, line: str) -> "CriterionResult":
        parts = line.split()
        if len(parts) != 3 or parts[0] not in ("PASS", "FAIL"):
            raise ValueError(f"not a verdict line: {line!r}")
        return cls(name=parts[1], passed=parts[0] == "PASS", measured=parts[2])


class RunVerdict(BaseModel):
    """Verdict over every criterion the world spec lists."""

    model_config = {
        "validate_assignment": True,
        "extra": "forbid"
    }

    scenario: str = Field(description="World name")
    mode: str = Field(default="async")
    seed: int = Field(default=0, ge=0)
    latency: str = Field(default="30+-20", description="Latency model used")
    criteria: List[CriterionResult] = Field(default_factory=list)

    @computed_field
    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    @computed_field
    @property
    def failed_criteria(self) -> List[str]:
        return [c.name for c in self.criteria if not c.passed]

    def get(self, name: str) -> Optional[CriterionResult]:
        return next((c for c in self.criteria if c.name == name), None)

    def summary_line(self) -> str:
        passed = sum(c.passed for c in self.criteria)
        status = "PASS" if self.passed else "FAIL"
        return (
            f"# {status} {passed}/{len(self.criteria)} criteria "
            f"scenario={self.scenario} mode={self.mode} seed={self.seed} latency={self.latency}"
        )

    def to_text(self) -> str:
        lines = [c.to_line() for c in self.criteria]
        lines.append(self.summary_line())
        return "\n".join(lines) + "\n"

    def export_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")
