"""Integration tests for the websocket brick link and free-running mode."""

import time

import pytest

from src.lib.asl_parser import parse_term
from src.lib.bridge import (
    TO_ENGINE,
    TO_ROBOT,
    PerceptKind,
    SimClock,
    WireLog,
    ack_message,
    encode_action,
    percept_message,
)
from src.lib.bridge.socket_link import BrickServer, SocketLink

from .test_scenarios import run_case


def wait_for(predicate, timeout=3.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if predicate():
            return True
        time.sleep(0.01)
    return False


@pytest.mark.integration
class TestSocketLink:
    """Wire records over a localhost websocket."""

    @pytest.fixture
    def server(self):
        received = []
        server = BrickServer("nxt", received.append)
        server.start()
        server.received = received
        yield server
        server.stop()

    def test_records_both_ways(self, server):
        inbox = []
        log = WireLog()
        link = SocketLink("walker", server.uri, inbox.append, SimClock(), log)
        try:
            action = encode_action(parse_term("forward([a,b],[60,60])"), 1)
            link.send(action)
            assert wait_for(lambda: server.received == [action])

            assert wait_for(lambda: server.port.is_open)
            server.port.send(ack_message(1))
            server.port.send(percept_message(PerceptKind.LIGHT, 1, 500))
            assert wait_for(lambda: len(inbox) == 2)

            assert inbox[0] == ack_message(1)
            assert [direction for _, direction, _ in log.entries] == [TO_ROBOT, TO_ENGINE, TO_ENGINE]
        finally:
            link.close()

        assert not link.is_open

    def test_closed_link_drops_sends(self, server):
        log = WireLog()
        link = SocketLink("walker", server.uri, lambda message: None, SimClock(), log)
        link.close()

        link.send(ack_message(3))

        assert log.count() == 0


@pytest.mark.integration
@pytest.mark.slow
class TestFreeRunning:
    """Threads on wall-clock time instead of lock-step."""

    @pytest.mark.parametrize("transport", ["inproc", "socket"])
    def test_run_finishes_and_writes_outputs(self, linefollower_project, linetrack_world, tmp_path, transport):
        out = tmp_path / "out"

        result = run_case(
            linefollower_project, linetrack_world, out,
            free_running=True, transport=transport, max_time_ms=500,
        )

        assert result.end_time_ms >= 500
        assert (out / "verdict.txt").exists()
        assert result.metrics["linefollower"].cycles > 0
        assert result.transport_messages["tracker"] > 0
