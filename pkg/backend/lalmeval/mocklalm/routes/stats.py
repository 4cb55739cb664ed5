"""Counter inspection and reset."""

from typing import Annotated

from fastapi import APIRouter, Depends

from lalmeval.domain.models import MockStats
from lalmeval.mocklalm.routes.deps import get_state
from lalmeval.mocklalm.state import MockState

router = APIRouter()


@router.get("/stats", response_model=MockStats, summary="Request counters")
def stats(state: Annotated[MockState, Depends(get_state)]) -> MockStats:
    """Current counters and per-request log."""
    return state.snapshot()


@router.post("/reset", response_model=MockStats, summary="Reset counters")
def reset(state: Annotated[MockState, Depends(get_state)]) -> MockStats:
    """Zero counters, failure script and generator; returns the fresh counters."""
    state.reset()
    return state.snapshot()
