"""Wire records over a local websocket, one connection per brick.

The brick side runs a `BrickServer`; the agent side connects a
`SocketLink` to it. Each websocket text frame carries one wire record.
Only used in free-running mode.
"""

from __future__ import annotations

import logging
import threading
from typing import Callable, Optional

from websockets.exceptions import ConnectionClosed
from websockets.sync.client import ClientConnection, connect
from websockets.sync.server import Server, ServerConnection, serve

from .transport import TO_ENGINE, TO_ROBOT, WireLog
from .wire import BridgeError, WireMessage

logger = logging.getLogger(__name__)

Sink = Callable[[WireMessage], None]


class _ServerPort:
    """Brick-side sender writing to whichever agent is connected."""

    def __init__(self):
        self.connection: Optional[ServerConnection] = None
        self._lock = threading.Lock()

    def send(self, message: WireMessage) -> None:
        with self._lock:
            if self.connection is None:
                return
            try:
                self.connection.send(message.encode())
            except ConnectionClosed:
                self.connection = None

    @property
    def is_open(self) -> bool:
        return self.connection is not None


class BrickServer:
    """Serve one simulated brick on localhost."""

    def __init__(self, name: str, sink: Sink, host: str = "127.0.0.1", port: int = 0):
        self.name = name
        self.sink = sink
        self.port = _ServerPort()
        self._server: Server = serve(self._handle, host, port)
        self._thread = threading.Thread(target=self._server.serve_forever, name=f"brick-{name}", daemon=True)

    @property
    def uri(self) -> str:
        host, port = self._server.socket.getsockname()[:2]
        return f"ws://{host}:{port}"

    def start(self) -> None:
        self._thread.start()

    def _handle(self, connection: ServerConnection) -> None:
        self.port.connection = connection
        logger.debug("%s: agent connected", self.name)
        try:
            for frame in connection:
                try:
                    self.sink(WireMessage.decode(str(frame)))
                except BridgeError as e:
                    logger.warning("%s: dropping bad record %r: %s", self.name, frame, e)
        except ConnectionClosed:
            pass
        finally:
            self.port.connection = None

    def stop(self) -> None:
        self._server.shutdown()
        self._thread.join(timeout=2.0)


class SocketLink:
    """Agent-side link to a BrickServer."""

    def __init__(self, name: str, uri: str, sink: Sink, clock, wire_log: Optional[WireLog] = None):
        self.name = name
        self.clock = clock
        self.sink = sink
        self.wire_log = wire_log if wire_log is not None else WireLog()
        self._connection: ClientConnection = connect(uri)
        self._open = True
        self._reader = threading.Thread(target=self._read, name=f"link-{name}", daemon=True)
        self._reader.start()

    def _read(self) -> None:
        try:
            for frame in self._connection:
                try:
                    message = WireMessage.decode(str(frame))
                except BridgeError as e:
                    logger.warning("%s: dropping bad record %r: %s", self.name, frame, e)
                    continue
                self.wire_log.record(self.clock.now_ms, TO_ENGINE, message)
                self.sink(message)
        except ConnectionClosed:
            pass
        finally:
            self._open = False

    def send(self, message: WireMessage) -> None:
        if not self._open:
            return
        self.wire_log.record(self.clock.now_ms, TO_ROBOT, message)
        try:
            self._connection.send(message.encode())
        except ConnectionClosed:
            self._open = False

    @property
    def is_open(self) -> bool:
        return self._open

    def close(self) -> None:
        self._open = False
        self._connection.close()
        self._reader.join(timeout=2.0)
