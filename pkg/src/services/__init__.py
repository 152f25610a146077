"""Core services for the NXT agent runtime."""

from .belief_base import BeliefBase, BeliefBaseError
from .engine import Agent, AgentRegistry, MessageEnvelope, deliver_message
from .harness import ScenarioError, ScenarioHarness, ScenarioResult, replay_run, run_scenario
from .intentions import Event, Frame, Intention, IntentionStatus
from .trace_output import TraceStorage, TraceStorageError
from .verdict import ScenarioOutputs, compute_verdict

__all__ = [
    "Agent",
    "AgentRegistry",
    "BeliefBase",
    "BeliefBaseError",
    "Event",
    "Frame",
    "Intention",
    "IntentionStatus",
    "MessageEnvelope",
    "ScenarioError",
    "ScenarioHarness",
    "ScenarioOutputs",
    "ScenarioResult",
    "TraceStorage",
    "TraceStorageError",
    "compute_verdict",
    "deliver_message",
    "replay_run",
    "run_scenario",
]
