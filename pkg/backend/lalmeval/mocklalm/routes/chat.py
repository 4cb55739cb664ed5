"""Chat-completions endpoint of the mock."""

import asyncio
from typing import Annotated, Any

from fastapi import APIRouter, Depends, Header
from fastapi.responses import JSONResponse

from lalmeval.domain.models import CompletionRequest
from lalmeval.mocklalm.routes.deps import get_state
from lalmeval.mocklalm.state import MockState, reply_text

router = APIRouter()


def _completion(request: CompletionRequest, text: str, number: int) -> dict[str, Any]:
    prompt_words = sum(len(m.text.split()) for m in request.messages)
    return {
        "id": f"mockcmpl-{number}",
        "object": "chat.completion",
        "created": 0,
        "model": request.model,
        "choices": [{"index": 0, "message": {"role": "assistant", "content": text}, "finish_reason": "stop"}],
        "usage": {"prompt_tokens": prompt_words, "completion_tokens": len(text.split())},
    }


@router.post(
    "/chat/completions",
    summary="Scripted chat completion",
    description="Echoes the last user text or returns the scripted reply of the sample, after the configured latency.",
    responses={500: {"description": "Injected failure (status configurable)"}},
)
async def chat_completions(
    request: CompletionRequest,
    state: Annotated[MockState, Depends(get_state)],
    x_sample_id: Annotated[str | None, Header()] = None,
) -> JSONResponse:
    """Answer a chat-completions request.

    Args:
        request: Incoming request body.
        state: Mock state of the app.
        x_sample_id: Optional sample key header.

    Returns:
        Completion document, or the injected error.
    """
    admission = state.admit(request, x_sample_id)
    try:
        await asyncio.sleep(admission.latency_s)
    finally:
        state.finish()

    if admission.fail:
        return JSONResponse(
            status_code=state.behavior.fail_status,
            content={"error": {"message": "injected failure", "type": "mock_error"}},
        )
    text = reply_text(request, admission.sample_key, state.behavior)
    return JSONResponse(content=_completion(request, text, admission.number))
