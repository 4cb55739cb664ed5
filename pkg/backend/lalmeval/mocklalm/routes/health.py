"""Health check endpoint."""

from fastapi import APIRouter

from lalmeval import __version__
from lalmeval.domain.models import HealthResponse

router = APIRouter()


@router.get("/health", response_model=HealthResponse, summary="Health check")
def health() -> HealthResponse:
    """Service status and version."""
    return HealthResponse(status="ok", version=__version__)
