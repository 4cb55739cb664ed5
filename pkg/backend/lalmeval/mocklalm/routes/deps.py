"""Shared route dependencies."""

from fastapi import Request

from lalmeval.mocklalm.state import MockState


def get_state(request: Request) -> MockState:
    """Mock state attached to the running app."""
    state: MockState = request.app.state.mock
    return state
