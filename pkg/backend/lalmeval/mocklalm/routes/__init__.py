"""Router registration for the mock endpoint.

The chat route is served both under ``/v1`` and at the root so clients can
use either ``http://host:port/v1`` or ``http://host:port`` as base URL.
"""

from fastapi import APIRouter

from lalmeval.mocklalm.routes import chat, health, stats

v1_router = APIRouter(prefix="/v1", tags=["v1"])
v1_router.include_router(chat.router)

root_router = APIRouter(tags=["mock"])
root_router.include_router(chat.router)
root_router.include_router(stats.router)
root_router.include_router(health.router)
