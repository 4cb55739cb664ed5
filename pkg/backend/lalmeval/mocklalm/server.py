"""Running the mock endpoint on a real port.

``serve`` binds the socket itself, so a busy port is reported as a
BindError before any thread starts, then runs uvicorn in a background
thread. Port 0 picks a free ephemeral port.
"""

import socket
import threading
import time
from types import TracebackType
from typing import Self

import uvicorn

from lalmeval.core.config import get_settings
from lalmeval.core.logging import get_logger
from lalmeval.domain.errors import BindError
from lalmeval.domain.models import MockBehavior, MockStats
from lalmeval.mocklalm.app import create_mock_app
from lalmeval.mocklalm.state import MockState

logger = get_logger(__name__)

STARTUP_TIMEOUT_S = 10.0


class MockServerHandle:
    """A mock endpoint running in a background thread.

    Attributes:
        host: Bound interface.
        port: Bound port.
    """

    def __init__(self, server: uvicorn.Server, thread: threading.Thread, state: MockState, host: str, port: int):
        self._server = server
        self._thread = thread
        self._state = state
        self.host = host
        self.port = port

    @property
    def base_url(self) -> str:
        """Base URL to put in an EndpointSpec."""
        return f"http://{self.host}:{self.port}/v1"

    def stats(self) -> MockStats:
        """Current counters."""
        return self._state.snapshot()

    def reset(self) -> None:
        """Zero counters and restart the seeded generator."""
        self._state.reset()

    def close(self) -> None:
        """Stop the server and wait for its thread."""
        self._server.should_exit = True
        self._thread.join(timeout=STARTUP_TIMEOUT_S)

    def __enter__(self) -> Self:
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        self.close()


def bind_socket(host: str, port: int) -> socket.socket:
    """Bind a listening TCP socket.

    Raises:
        BindError: The address is unavailable.
    """
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
    except OSError as e:
        sock.close()
        raise BindError(host, port, e.strerror or str(e)) from e
    return sock


def serve(behavior: MockBehavior | None = None, port: int = 0, host: str | None = None) -> MockServerHandle:
    """Start a mock endpoint.

    Args:
        behavior: Scripted behavior; instant echo when omitted.
        port: TCP port, 0 for an ephemeral one.
        host: Interface; defaults to ``Settings.mock_host``.

    Returns:
        Handle of the running server.

    Raises:
        BindError: The port is taken or the server did not come up.
    """
    host = host or get_settings().mock_host
    sock = bind_socket(host, port)
    bound_port = sock.getsockname()[1]

    app = create_mock_app(behavior)
    config = uvicorn.Config(app, log_level="warning", lifespan="off", backlog=4096, timeout_keep_alive=30)
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, kwargs={"sockets": [sock]}, name=f"mock-{bound_port}", daemon=True)
    thread.start()

    deadline = time.monotonic() + STARTUP_TIMEOUT_S
    while not server.started:
        if not thread.is_alive() or time.monotonic() > deadline:
            server.should_exit = True
            sock.close()
            raise BindError(host, bound_port, "server did not start")
        time.sleep(0.01)

    logger.info("Mock endpoint listening on http://%s:%d", host, bound_port)
    return MockServerHandle(server, thread, app.state.mock, host, bound_port)
