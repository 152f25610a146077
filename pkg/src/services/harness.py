"""ScenarioHarness service: wire agents, bridges and simulated bricks together and run them.

Lock-step mode is single-threaded and reproducible: every tick the bricks
move and sample, the transports deliver what is due, and each agent that is
ready gets one reasoning cycle. Free-running mode gives every brick, agent
and transport its own thread on wall-clock time.
"""

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import structlog

from ..lib.asl_parser import AgentProgram, AslSyntaxError, ProjectFileError, load_project_file, parse_agent_program
from ..lib.bridge import (
    BridgeEndpoint,
    BridgeMode,
    LatencyModel,
    LatencyTransport,
    SimClock,
    WallClock,
    WireLog,
)
from ..lib.bridge.socket_link import BrickServer, SocketLink
from ..lib.config import ConfigValidator
from ..lib.nxt_sim import SimulatedBrick, World, WorldSpecError, build_brick, build_world, default_mount, load_world_spec
from ..models.cycle_report import AgentMetrics, CycleReport
from ..models.project_config import AgentConfig, ProjectConfig, SensorKind
from ..models.run_verdict import RunVerdict
from ..models.scenario_run import ScenarioRun
from ..models.world_spec import WorldSpec
from .engine import Agent, AgentRegistry
from .trace_output import TraceStorage, round_pose
from .verdict import CRITERIA, RobotRecord, ScenarioOutputs, compute_verdict

logger = structlog.get_logger(__name__)


class ScenarioError(Exception):
    """A scenario cannot start: bad project, world or program, or an inconsistent pairing."""

    def __init__(self, message: str, path: Optional[str] = None):
        self.message = message
        self.path = path
        super().__init__(message)

    def __str__(self) -> str:
        if self.path:
            return f"{self.path}: {self.message}"
        return self.message


@dataclass
class RobotRig:
    """One agent with its endpoint, link and brick."""
    config: AgentConfig
    agent: Agent
    endpoint: BridgeEndpoint
    brick: SimulatedBrick
    wire_log: WireLog
    transport: Optional[LatencyTransport] = None
    server: Optional[BrickServer] = None
    link: Optional[SocketLink] = None
    poses: List[Tuple[int, float, float, float]] = field(default_factory=list)
    reports: List[CycleReport] = field(default_factory=list)

    @property
    def sent(self) -> int:
        if self.transport is not None:
            return sum(self.transport.sent.values())
        return self.wire_log.count()

    def record_pose(self, now_ms: int) -> None:
        pose = self.brick.body.pose
        self.poses.append(round_pose(now_ms, pose.x, pose.y, pose.heading))


@dataclass
class ScenarioResult:
    outputs: ScenarioOutputs
    verdict: RunVerdict
    metrics: Dict[str, AgentMetrics]
    transport_messages: Dict[str, int]
    internal_messages: int
    end_time_ms: int
    output_dir: Path


def load_programs(project: ProjectConfig) -> Dict[str, AgentProgram]:
    programs = {}
    for agent in project.agents:
        source = project.source_for(agent)
        try:
            text = source.read_text(encoding="utf-8")
        except OSError as e:
            raise ScenarioError(f"cannot read agent program: {e}", str(source)) from e
        try:
            programs[agent.name] = parse_agent_program(text)
        except AslSyntaxError as e:
            raise ScenarioError(str(e), str(source)) from e
    return programs


class ScenarioHarness:
    """Runs one project in one world under one set of run settings."""

    def __init__(
        self,
        run: ScenarioRun,
        project: ProjectConfig,
        world_spec: WorldSpec,
        programs: Dict[str, AgentProgram],
    ):
        self.run = run
        self.project = project
        self.world_spec = world_spec
        self.programs = programs
        self.world: World = build_world(world_spec)
        self.registry = AgentRegistry()
        self.rigs: List[RobotRig] = []
        self.clock = WallClock() if run.free_running else SimClock(0)
        self._check()
        self._build()

    @classmethod
    def from_files(cls, run: ScenarioRun) -> "ScenarioHarness":
        try:
            project = load_project_file(run.project_path)
        except (ProjectFileError, OSError) as e:
            raise ScenarioError(str(e), run.project_path) from e
        try:
            world_spec = load_world_spec(run.world_path)
        except (WorldSpecError, OSError) as e:
            raise ScenarioError(str(e), run.world_path) from e
        return cls(run, project, world_spec, load_programs(project))

    def _check(self) -> None:
        result = ConfigValidator().validate_project(self.project, self.world_spec, self.programs)
        if not result.is_valid:
            raise ScenarioError(str(result.errors[0]), self.run.project_path)
        for warning in result.warnings:
            logger.warning("Project check", warning=warning)
        unknown = [name for name in self.world_spec.criteria if name not in CRITERIA]
        if unknown:
            raise ScenarioError(f"unknown criteria: {', '.join(unknown)}", self.run.world_path)

    def _build(self) -> None:
        run = self.run
        latency = LatencyModel(run.latency_ms, run.jitter_ms)
        children = np.random.SeedSequence(run.seed).spawn(max(1, len(self.project.agents)))

        for agent_config, seeds in zip(self.project.agents, children):
            sensor_seed, transport_seed = seeds.spawn(2)
            wire_log = WireLog()
            endpoint = BridgeEndpoint(agent_config.name, None, BridgeMode(run.mode), run.action_timeout_ms)
            brick = build_brick(agent_config, self.world_spec, self.world, np.random.default_rng(sensor_seed))
            rig_kwargs = {}

            if run.transport == "socket":
                server = BrickServer(agent_config.btname, brick.receive)
                server.start()
                brick.link = server.port
                endpoint.link = SocketLink(agent_config.name, server.uri, endpoint.receive, self.clock, wire_log)
                rig_kwargs.update(server=server, link=endpoint.link)
            else:
                transport = LatencyTransport(
                    agent_config.btname, self.clock, latency, np.random.default_rng(transport_seed), wire_log
                )
                transport.connect(endpoint.receive, brick.receive)
                endpoint.link = transport.engine_port
                brick.link = transport.robot_port
                rig_kwargs.update(transport=transport)

            agent = Agent(
                agent_config.name,
                self.programs[agent_config.name],
                endpoint=endpoint,
                registry=self.registry,
                uniqueness_patterns=agent_config.unique_patterns,
                max_depth=run.max_depth,
            )
            self.rigs.append(RobotRig(agent_config, agent, endpoint, brick, wire_log, **rig_kwargs))

        logger.info(
            "Scenario ready",
            world=self.world_spec.name,
            agents=[rig.agent.name for rig in self.rigs],
            mode=run.mode,
            latency=run.latency_text,
            seed=run.seed,
            free_running=run.free_running,
        )

    # running

    def _all_halted(self) -> bool:
        return all(rig.agent.halted for rig in self.rigs)

    def run_lock_step(self) -> int:
        tick = self.run.tick_ms
        clock: SimClock = self.clock
        for rig in self.rigs:
            rig.record_pose(0)

        while self.rigs and clock.now_ms < self.run.max_time_ms and not self._all_halted():
            clock.advance(tick)
            now = clock.now_ms
            for rig in self.rigs:
                rig.brick.tick(now, tick)
                rig.record_pose(now)
            for rig in self.rigs:
                rig.transport.deliver(now)
            for rig in self.rigs:
                if rig.agent.ready(now):
                    rig.reports.append(rig.agent.reasoning_cycle(now))
        return clock.now_ms

    def run_free(self) -> int:
        stop = threading.Event()
        tick_s = self.run.tick_ms / 1000.0
        clock: WallClock = self.clock
        errors: List[BaseException] = []

        def guarded(target):
            def loop():
                try:
                    target()
                except Exception as e:
                    logger.error("Worker failed", error=str(e), exc_info=True)
                    errors.append(e)
                    stop.set()
            return loop

        def brick_loop(rig: RobotRig):
            last = clock.now_ms
            rig.record_pose(last)
            while not stop.is_set():
                now = clock.now_ms
                if now > last:
                    rig.brick.tick(now, now - last)
                    rig.record_pose(now)
                    last = now
                time.sleep(tick_s)

        def transport_loop(rig: RobotRig):
            while not stop.is_set():
                rig.transport.deliver(clock.now_ms)
                time.sleep(0.001)

        def agent_loop(rig: RobotRig):
            while not stop.is_set() and not rig.agent.halted:
                now = clock.now_ms
                if rig.agent.ready(now):
                    rig.reports.append(rig.agent.reasoning_cycle(now))
                else:
                    time.sleep(0.001)

        threads = []
        for rig in self.rigs:
            threads.append(threading.Thread(target=guarded(lambda r=rig: brick_loop(r)), name=f"brick-{rig.config.btname}"))
            threads.append(threading.Thread(target=guarded(lambda r=rig: agent_loop(r)), name=f"agent-{rig.agent.name}"))
            if rig.transport is not None:
                threads.append(threading.Thread(
                    target=guarded(lambda r=rig: transport_loop(r)), name=f"transport-{rig.config.btname}"
                ))
        for thread in threads:
            thread.daemon = True
            thread.start()

        while self.rigs and clock.now_ms < self.run.max_time_ms and not self._all_halted() and not stop.is_set():
            time.sleep(0.01)
        stop.set()
        for thread in threads:
            thread.join(timeout=2.0)
        if errors:
            raise errors[0]
        return clock.now_ms

    def close(self) -> None:
        for rig in self.rigs:
            if rig.transport is not None:
                rig.transport.close()
            if rig.link is not None:
                rig.link.close()
            if rig.server is not None:
                rig.server.stop()

    # results

    def _robot_record(self, rig: RobotRig) -> RobotRecord:
        placement = self.world_spec.placement(rig.config.btname)
        light_mounts = [
            tuple(placement.mounts.get(port, default_mount(kind, port)))
            for port, kind in rig.config.active_sensors.items()
            if kind is SensorKind.LIGHT
        ]
        return RobotRecord(agent=rig.agent.name, radius=self.world_spec.robot_radius, light_mounts=light_mounts)

    def outputs(self) -> ScenarioOutputs:
        return ScenarioOutputs(
            run=self.run,
            world_spec=self.world_spec,
            robots={rig.config.btname: self._robot_record(rig) for rig in self.rigs},
            poses={rig.config.btname: np.array(rig.poses, dtype=float).reshape(-1, 4) for rig in self.rigs},
            wire={rig.config.btname: list(rig.wire_log.entries) for rig in self.rigs},
            cycles={rig.agent.name: list(rig.reports) for rig in self.rigs},
        )

    def execute(self) -> ScenarioResult:
        """Run to completion, write every output file and the verdict."""
        started = time.monotonic()
        try:
            end_ms = self.run_free() if self.run.free_running else self.run_lock_step()
        finally:
            self.close()

        outputs = self.outputs()
        metrics = {rig.agent.name: rig.agent.metrics for rig in self.rigs}
        transport_messages = {rig.config.btname: rig.sent for rig in self.rigs}
        internal = self.registry.internal_messages
        verdict = compute_verdict(outputs, self.world)

        storage = TraceStorage(self.run.output_dir)
        storage.write_outputs(outputs, {
            "end_time_ms": end_ms,
            "transport_messages": transport_messages,
            "internal_messages": internal,
            "agents": {name: m.model_dump(mode="json") for name, m in metrics.items()},
        })
        storage.write_verdict(verdict)

        logger.info(
            "Scenario finished",
            world=self.world_spec.name,
            simulated_ms=end_ms,
            wall_s=round(time.monotonic() - started, 2),
            passed=verdict.passed,
        )
        return ScenarioResult(
            outputs=outputs,
            verdict=verdict,
            metrics=metrics,
            transport_messages=transport_messages,
            internal_messages=internal,
            end_time_ms=end_ms,
            output_dir=Path(self.run.output_dir),
        )


def run_scenario(run: ScenarioRun) -> ScenarioResult:
    """Load, run and judge one scenario."""
    return ScenarioHarness.from_files(run).execute()


def replay_run(directory: Path) -> Tuple[RunVerdict, Optional[RunVerdict]]:
    """Recompute the verdict of a finished run; returns (recomputed, recorded)."""
    storage = TraceStorage(directory)
    outputs = storage.load_outputs()
    return compute_verdict(outputs), storage.load_verdict()
