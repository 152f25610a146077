"""CycleReport data model: what one reasoning cycle did, plus per-agent totals."""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, computed_field


class CycleReport(BaseModel):
    """Instrumentation record for a single reasoning cycle."""

    model_config = {
        "validate_assignment": True,
        "extra": "forbid"
    }

    agent: str = Field(description="Agent name")
    cycle: int = Field(ge=0, description="Cycle counter after this cycle")
    time_ms: int = Field(ge=0, description="Simulated time the cycle ran at")

    percepts: int = Field(default=0, ge=0, description="Percepts drained from the bridge")
    percept_queue_empty: bool = Field(default=True, description="No percept was waiting when the cycle began")
    acks: int = Field(default=0, ge=0, description="Action outcomes settled this cycle")
    messages: int = Field(default=0, ge=0, description="Mailbox messages ingested")
    received: List[str] = Field(default_factory=list, description="Ingested messages as performative plus annotated belief")

    event: Optional[str] = Field(default=None, description="Selected event")
    plan: Optional[str] = Field(default=None, description="Plan pushed for the event")
    intention: Optional[int] = Field(default=None, description="Intention that executed a step")
    step: Optional[str] = Field(default=None, description="Executed body step, bindings applied")
    failure: Optional[str] = Field(default=None, description="Step or goal failure reason")

    actions_sent: int = Field(default=0, ge=0, description="Transport actions sent this cycle")
    internal_sent: int = Field(default=0, ge=0, description="Agent-to-agent messages sent this cycle")
    woken: int = Field(default=0, ge=0, description="Intentions woken from .wait")

    events_queued: int = Field(default=0, ge=0, description="Event queue length after the cycle")
    intentions: int = Field(default=0, ge=0, description="Intentions held after the cycle")
    unique_ok: bool = Field(default=True, description="Every uniqueness pattern held at the boundary")
    halted: bool = Field(default=False, description="Agent halted after exit")

    @computed_field
    @property
    def idle(self) -> bool:
        """Nothing was selected or executed."""
        return self.event is None and self.step is None

    def export_dict(self) -> Dict[str, Any]:
        """Export as a JSON-compatible dictionary, computed fields excluded."""
        return self.model_dump(mode="json", exclude={"idle"})


class AgentMetrics(BaseModel):
    """Totals accumulated over one agent's cycles."""

    model_config = {
        "validate_assignment": True,
        "extra": "forbid"
    }

    agent: str = Field(description="Agent name")
    cycles: int = Field(default=0, ge=0)
    steps: int = Field(default=0, ge=0)
    events: int = Field(default=0, ge=0)
    failures: int = Field(default=0, ge=0)
    empty_percept_cycles: int = Field(default=0, ge=0, description="Cycles that began with no percept waiting")
    actions_sent: int = Field(default=0, ge=0)
    internal_sent: int = Field(default=0, ge=0)
    uniqueness_violations: int = Field(default=0, ge=0)

    def record(self, report: CycleReport) -> None:
        self.cycles += 1
        self.steps += report.step is not None
        self.events += report.event is not None
        self.failures += report.failure is not None
        self.empty_percept_cycles += report.percept_queue_empty
        self.actions_sent += report.actions_sent
        self.internal_sent += report.internal_sent
        self.uniqueness_violations += not report.unique_ok

    @computed_field
    @property
    def step_rate(self) -> float:
        """Share of cycles that executed a step."""
        if self.cycles == 0:
            return 0.0
        return round(self.steps / self.cycles, 4)

    @classmethod
    def from_reports(cls, agent: str, reports: List[CycleReport]) -> "AgentMetrics":
        metrics = cls(agent=agent)
        for report in reports:
            metrics.record(report)
        return metrics
