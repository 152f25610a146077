"""Verdict computation: judge a run's recorded outputs against scenario criteria.

Everything here works on what the harness writes to disk (poses, wire
records, cycle reports), so `replay` reaches the same verdict as the run.
"""

import re
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import structlog

from ..lib.bridge import TO_ENGINE, TO_ROBOT, PerceptKind, WireKind, WireMessage
from ..lib.nxt_sim import CrossingWorld, LineTrack, World, build_world
from ..models.cycle_report import CycleReport
from ..models.run_verdict import CriterionResult, RunVerdict
from ..models.scenario_run import ScenarioRun
from ..models.world_spec import WorldSpec

logger = structlog.get_logger(__name__)

MAX_OFF_BAND_MS = 500
ADOPTION_TOLERANCE_CYCLES = 2
OBSTACLE_NEAR_CM = 15

_SEND_RE = re.compile(r"^\.send\((\w+), tell, obstacle_after\((\d+)\)\)$")
_BARS_RE = re.compile(r"^-\+bars_passed\((\d+)\)$")
_OBSTACLE_EVENT_RE = re.compile(r"^\+obstacle\((\d+),(\d+)\)\[source\(percept\)\]$")


@dataclass
class RobotRecord:
    """What the verdict needs to know about one robot besides its trace."""
    agent: str
    radius: float = 60.0
    light_mounts: List[Tuple[float, float]] = field(default_factory=list)


@dataclass
class ScenarioOutputs:
    """A run's recorded outputs, in memory or reloaded from its directory."""
    run: ScenarioRun
    world_spec: WorldSpec
    robots: Dict[str, RobotRecord]
    poses: Dict[str, np.ndarray]
    wire: Dict[str, List[Tuple[int, str, str]]]
    cycles: Dict[str, List[CycleReport]]

    def agent_robot(self, agent: str) -> Optional[str]:
        return next((bt for bt, rec in self.robots.items() if rec.agent == agent), None)


Criterion = Callable[[ScenarioOutputs, World], CriterionResult]
CRITERIA: Dict[str, Criterion] = {}


def criterion(name: str):
    def decorator(fn: Criterion) -> Criterion:
        CRITERIA[name] = fn
        return fn
    return decorator


def _fmt(value: float) -> str:
    return f"{value:.1f}"


def _mount_points(poses: np.ndarray, forward: float, lateral: float) -> np.ndarray:
    x, y, heading = poses[:, 1], poses[:, 2], poses[:, 3]
    c, s = np.cos(heading), np.sin(heading)
    return np.column_stack((x + forward * c - lateral * s, y + forward * s + lateral * c))


def _track_profile(outputs: ScenarioOutputs, track: LineTrack, robot: str):
    """Per-pose progress, midpoint lateral offset and per-mount off-band flags."""
    poses = outputs.poses[robot]
    mounts = outputs.robots[robot].light_mounts or [(60.0, 0.0)]
    mid_forward = float(np.mean([m[0] for m in mounts]))
    mid_lateral = float(np.mean([m[1] for m in mounts]))
    midpoints = _mount_points(poses, mid_forward, mid_lateral)
    progress = np.empty(len(poses))
    lateral = np.empty(len(poses))
    for i, (x, y) in enumerate(midpoints):
        progress[i], lateral[i], _ = track.project(x, y)

    off = np.zeros(len(poses), dtype=bool)
    for forward, side in mounts:
        for i, (x, y) in enumerate(_mount_points(poses, forward, side)):
            off[i] |= not track.on_band(x, y)

    reached = np.nonzero(progress >= track.length - 1.0)[0]
    end = int(reached[0]) if len(reached) else len(poses)
    return progress, lateral, off, end


def _line_robots(outputs: ScenarioOutputs) -> List[str]:
    return [bt for bt, rec in outputs.robots.items() if rec.light_mounts and bt in outputs.poses]


@criterion("track_completed")
def track_completed(outputs: ScenarioOutputs, world: World) -> CriterionResult:
    if not isinstance(world, LineTrack):
        return CriterionResult(name="track_completed", passed=False, measured="not-a-track")
    best = []
    for robot in _line_robots(outputs):
        progress, _, _, _ = _track_profile(outputs, world, robot)
        best.append(float(progress.max()) if len(progress) else 0.0)
    passed = bool(best) and all(p >= world.length - 1.0 for p in best)
    measured = ",".join(f"{_fmt(p)}/{_fmt(world.length)}" for p in best) or "no-robot"
    return CriterionResult(name="track_completed", passed=passed, measured=measured,
                           detail="light-mount midpoint progress along the track")


@criterion("off_band")
def off_band(outputs: ScenarioOutputs, world: World) -> CriterionResult:
    if not isinstance(world, LineTrack):
        return CriterionResult(name="off_band", passed=False, measured="not-a-track")
    longest = 0
    for robot in _line_robots(outputs):
        poses = outputs.poses[robot]
        _, _, off, end = _track_profile(outputs, world, robot)
        start = None
        for i in range(min(end + 1, len(poses))):
            if off[i] and start is None:
                start = poses[i, 0]
            elif not off[i] and start is not None:
                longest = max(longest, int(poses[i, 0] - start))
                start = None
        if start is not None:
            last = poses[min(end, len(poses) - 1), 0]
            longest = max(longest, int(last - start))
    return CriterionResult(name="off_band", passed=longest <= MAX_OFF_BAND_MS, measured=f"{longest}ms",
                           detail=f"longest stretch with a light mount off the band (limit {MAX_OFF_BAND_MS} ms)")


def max_lateral_deviation(outputs: ScenarioOutputs, world: LineTrack, robot: str) -> float:
    _, lateral, _, end = _track_profile(outputs, world, robot)
    window = lateral[: end + 1]
    return float(np.abs(window).max()) if len(window) else 0.0


@criterion("lateral_deviation")
def lateral_deviation(outputs: ScenarioOutputs, world: World) -> CriterionResult:
    if not isinstance(world, LineTrack):
        return CriterionResult(name="lateral_deviation", passed=False, measured="not-a-track")
    worst = max((max_lateral_deviation(outputs, world, r) for r in _line_robots(outputs)), default=0.0)
    return CriterionResult(name="lateral_deviation", passed=worst <= world.half_band, measured=f"{_fmt(worst)}mm",
                           detail=f"max midpoint offset from the centre line (limit {world.half_band:g} mm)")


@criterion("unique_beliefs")
def unique_beliefs(outputs: ScenarioOutputs, world: World) -> CriterionResult:
    checked = sum(len(reports) for reports in outputs.cycles.values())
    broken = sum(1 for reports in outputs.cycles.values() for r in reports if not r.unique_ok)
    return CriterionResult(name="unique_beliefs", passed=broken == 0, measured=f"{broken}/{checked}",
                           detail="cycle boundaries with a uniqueness pattern violated")


def _sends(outputs: ScenarioOutputs) -> List[Tuple[str, str, int, int]]:
    found = []
    for agent, reports in outputs.cycles.items():
        for report in reports:
            match = _SEND_RE.match(report.step or "")
            if match:
                found.append((agent, match.group(1), int(match.group(2)), report.cycle))
    return found


@criterion("obstacle_reported_once")
def obstacle_reported_once(outputs: ScenarioOutputs, world: World) -> CriterionResult:
    sends = _sends(outputs)
    expected = outputs.world_spec.obstacle_after
    passed = len(sends) == 1 and sends[0][2] == expected
    measured = f"sends={len(sends)}" + (f",N={sends[0][2]}" if sends else "")
    return CriterionResult(name="obstacle_reported_once", passed=passed, measured=measured,
                           detail=f"obstacle_after sent exactly once with N={expected}")


@criterion("avoid_adopted_at_bar")
def avoid_adopted_at_bar(outputs: ScenarioOutputs, world: World) -> CriterionResult:
    sends = _sends(outputs)
    if len(sends) != 1:
        return CriterionResult(name="avoid_adopted_at_bar", passed=False, measured="no-single-send")
    _, receiver, bar, _ = sends[0]
    reports = outputs.cycles.get(receiver, [])

    reached = next((r.cycle for r in reports if (m := _BARS_RE.match(r.step or "")) and int(m.group(1)) == bar), None)
    adopted = next((r for r in reports if r.step == "-+goal(avoid)"), None)
    if reached is None or adopted is None:
        return CriterionResult(name="avoid_adopted_at_bar", passed=False,
                               measured=f"reached={reached},adopted={adopted.cycle if adopted else None}")

    delay = adopted.cycle - reached
    bars_at_adoption = max(
        (int(m.group(1)) for r in reports if r.cycle <= adopted.cycle and (m := _BARS_RE.match(r.step or ""))),
        default=0,
    )
    passed = 0 < delay <= ADOPTION_TOLERANCE_CYCLES and bars_at_adoption == bar
    return CriterionResult(name="avoid_adopted_at_bar", passed=passed, measured=f"bar={bars_at_adoption},delay={delay}",
                           detail=f"{receiver} adopts avoidance after bar {bar}")


@criterion("no_collision")
def no_collision(outputs: ScenarioOutputs, world: World) -> CriterionResult:
    if not world.obstacles:
        return CriterionResult(name="no_collision", passed=True, measured="no-obstacles")
    clearances = []
    for robot, poses in outputs.poses.items():
        radius = outputs.robots[robot].radius
        clearance = min(
            (box.distance_to(x, y) - radius for box in world.obstacles for x, y in poses[:, 1:3]),
            default=float("inf"),
        )
        clearances.append(clearance)
    worst = min(clearances, default=float("inf"))
    return CriterionResult(name="no_collision", passed=worst > 0, measured=f"{_fmt(worst)}mm",
                           detail="smallest gap between a robot footprint and an obstacle")


@criterion("final_bar_passed")
def final_bar_passed(outputs: ScenarioOutputs, world: World) -> CriterionResult:
    if not isinstance(world, CrossingWorld):
        return CriterionResult(name="final_bar_passed", passed=False, measured="not-a-crossing")
    reached = []
    for robot, poses in outputs.poses.items():
        furthest = float(poses[:, 1].max()) - outputs.robots[robot].radius if len(poses) else -np.inf
        reached.append((robot, furthest))
    passed = bool(reached) and all(x > world.final_bar_end for _, x in reached)
    measured = ",".join(f"{robot}={_fmt(x)}" for robot, x in reached)
    return CriterionResult(name="final_bar_passed", passed=passed, measured=measured,
                           detail=f"rear of every robot past x={world.final_bar_end:g}")


def _wire_messages(entries: List[Tuple[int, str, str]]) -> List[Tuple[int, str, WireMessage]]:
    return [(t, direction, WireMessage.decode(record)) for t, direction, record in entries]


def _obstacle_percepts(outputs: ScenarioOutputs, robot: Optional[str]) -> List[Tuple[int, int, int]]:
    """(time, port, value) of every OBSTACLE percept delivered to robot's agent."""
    if robot is None:
        return []
    return [
        (t, m.port, int(m.value))
        for t, d, m in _wire_messages(outputs.wire.get(robot, []))
        if d == TO_ENGINE and m.kind is WireKind.PERCEPT and m.percept is PerceptKind.OBSTACLE
    ]


def _triggering_percepts(outputs: ScenarioOutputs, sender: str, send_cycle: int) -> int:
    """Obstacle percepts that started a plan in the sender before its send, each backed by a wire record."""
    delivered = _obstacle_percepts(outputs, outputs.agent_robot(sender))
    count = 0
    for report in outputs.cycles.get(sender, []):
        match = _OBSTACLE_EVENT_RE.match(report.event or "")
        if report.plan is None or match is None or report.cycle > send_cycle:
            continue
        port, value = int(match.group(1)), int(match.group(2))
        if value < OBSTACLE_NEAR_CM and any(
            (p, v) == (port, value) and t <= report.time_ms for t, p, v in delivered
        ):
            count += 1
    return count


@criterion("sharing_messages")
def sharing_messages(outputs: ScenarioOutputs, world: World) -> CriterionResult:
    internal = sum(r.internal_sent for reports in outputs.cycles.values() for r in reports)
    sends = _sends(outputs)
    triggering = 0
    relayed = 0
    from_sender = False
    if len(sends) == 1:
        sender, receiver, bar, send_cycle = sends[0]
        triggering = _triggering_percepts(outputs, sender, send_cycle)
        relayed = len(_obstacle_percepts(outputs, outputs.agent_robot(receiver)))
        received = [text for r in outputs.cycles.get(receiver, []) for text in r.received]
        from_sender = received == [f"tell obstacle_after({bar})[source({sender})]"]
    passed = internal == 1 and triggering == 1 and relayed == 0 and from_sender
    return CriterionResult(name="sharing_messages", passed=passed,
                           measured=f"transport={triggering + relayed},internal={internal}",
                           detail="one obstacle percept over the transport, one agent message")


@criterion("cycle_mode_contract")
def cycle_mode_contract(outputs: ScenarioOutputs, world: World) -> CriterionResult:
    empty = {agent: sum(r.percept_queue_empty for r in reports) for agent, reports in outputs.cycles.items()}
    if outputs.run.mode == "sync":
        passed = all(count == 0 for count in empty.values())
    else:
        passed = bool(empty) and all(count > 0 for count in empty.values())
    measured = ",".join(f"{agent}={count}" for agent, count in empty.items()) or "no-agents"
    return CriterionResult(name="cycle_mode_contract", passed=passed, measured=measured,
                           detail="cycles that began with an empty percept queue")


@criterion("sync_ack_pairing")
def sync_ack_pairing(outputs: ScenarioOutputs, world: World) -> CriterionResult:
    passed = True
    totals = [0, 0]
    for robot, entries in outputs.wire.items():
        sent: Dict[int, int] = {}
        acked: Dict[int, int] = {}
        for _, direction, message in _wire_messages(entries):
            if direction == TO_ROBOT and message.kind is WireKind.ACTION:
                sent[message.action_id] = sent.get(message.action_id, 0) + 1
            elif direction == TO_ENGINE and message.kind is WireKind.ACK:
                acked[message.action_id] = acked.get(message.action_id, 0) + 1
        totals[0] += len(sent)
        totals[1] += len(acked)
        if any(count != 1 for count in acked.values()) or set(acked) - set(sent):
            passed = False
        if outputs.run.mode == "sync" and len(set(sent) - set(acked)) > 1:
            passed = False
    return CriterionResult(name="sync_ack_pairing", passed=passed, measured=f"actions={totals[0]},acks={totals[1]}",
                           detail="each action acknowledged exactly once")


def compute_verdict(outputs: ScenarioOutputs, world: Optional[World] = None) -> RunVerdict:
    """Judge every criterion the world spec lists."""
    world = world or build_world(outputs.world_spec)
    results = []
    for name in outputs.world_spec.criteria:
        judge = CRITERIA.get(name)
        if judge is None:
            results.append(CriterionResult(name=name, passed=False, measured="unknown-criterion"))
            continue
        results.append(judge(outputs, world))
    verdict = RunVerdict(
        scenario=outputs.world_spec.name,
        mode=outputs.run.mode,
        seed=outputs.run.seed,
        latency=outputs.run.latency_text,
        criteria=results,
    )
    logger.info("Verdict computed", scenario=verdict.scenario, passed=verdict.passed, failed=verdict.failed_criteria)
    return verdict
