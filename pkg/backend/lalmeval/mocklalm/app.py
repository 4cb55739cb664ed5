"""FastAPI application factory of the mock endpoint."""

from fastapi import FastAPI

from lalmeval import __version__
from lalmeval.core.config import get_settings
from lalmeval.domain.models import MockBehavior
from lalmeval.mocklalm.routes import root_router, v1_router
from lalmeval.mocklalm.state import MockState


def create_mock_app(behavior: MockBehavior | None = None) -> FastAPI:
    """Create a mock endpoint application.

    Args:
        behavior: Scripted latency, failures and replies; defaults to an
            instant echo server.

    Returns:
        Configured FastAPI application; its state is at ``app.state.mock``.
    """
    settings = get_settings()
    app = FastAPI(
        title=f"{settings.app_name} mock endpoint",
        description="Chat-completions mock with scripted latency and failure injection",
        version=__version__,
        debug=settings.debug,
    )
    app.state.mock = MockState(behavior or MockBehavior())
    app.include_router(v1_router)
    app.include_router(root_router)
    return app
