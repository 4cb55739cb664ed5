"""HTTP transport to OpenAI-compatible chat-completions endpoints."""

import os
import time
from typing import Any

import httpx
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from lalmeval.client.request import encode_request_body
from lalmeval.core.config import get_settings
from lalmeval.domain.errors import (
    EndpointConnectionError,
    HttpStatusError,
    RequestTimeoutError,
    ResponseDecodeError,
)
from lalmeval.domain.models import ChatResponse, EndpointSpec

SAMPLE_ID_HEADER = "X-Sample-Id"


class _CompletionMessage(BaseModel):
    model_config = ConfigDict(extra="ignore")

    content: str | list[dict[str, Any]] | None = None


class _CompletionChoice(BaseModel):
    model_config = ConfigDict(extra="ignore")

    message: _CompletionMessage
    finish_reason: str | None = None


class _CompletionUsage(BaseModel):
    model_config = ConfigDict(extra="ignore")

    prompt_tokens: int | None = None
    completion_tokens: int | None = None


class _CompletionBody(BaseModel):
    model_config = ConfigDict(extra="ignore")

    choices: list[_CompletionChoice] = Field(min_length=1)
    usage: _CompletionUsage | None = None


def classify_status(code: int) -> bool:
    """Whether an HTTP status is worth retrying.

    Server errors and 429 are transient; every other client error is final.
    """
    return code >= 500 or code == 429


def create_http_client() -> httpx.AsyncClient:
    """Create the shared HTTP client of a run.

    Per-request timeouts are passed at call time; the client only fixes the
    connection pool size and the connect timeout.
    """
    settings = get_settings()
    return httpx.AsyncClient(
        limits=httpx.Limits(
            max_connections=settings.http_max_connections,
            max_keepalive_connections=settings.http_max_connections,
        ),
        timeout=httpx.Timeout(None, connect=settings.http_connect_timeout_s),
    )


def completion_url(endpoint: EndpointSpec) -> str:
    """Full chat-completions URL of an endpoint."""
    return endpoint.base_url.rstrip("/") + "/chat/completions"


def _content_text(content: str | list[dict[str, Any]] | None) -> str:
    if content is None:
        return ""
    if isinstance(content, str):
        return content
    return "".join(str(part.get("text", "")) for part in content if part.get("type") == "text")


def decode_response(body: bytes, latency_s: float) -> ChatResponse:
    """Decode the first choice of a chat-completions response body.

    Raises:
        ResponseDecodeError: Body is not JSON or lacks ``choices[0].message``.
    """
    try:
        parsed = _CompletionBody.model_validate_json(body)
    except ValidationError as e:
        raise ResponseDecodeError(f"Malformed completion response: {e.errors()[0]['msg']}") from e
    choice = parsed.choices[0]
    usage = parsed.usage or _CompletionUsage()
    return ChatResponse(
        text=_content_text(choice.message.content),
        finish_reason=choice.finish_reason or "stop",
        latency_s=latency_s,
        prompt_tokens=usage.prompt_tokens,
        completion_tokens=usage.completion_tokens,
    )


async def send_request(
    endpoint: EndpointSpec,
    request: dict[str, Any],
    timeout_s: float,
    *,
    http: httpx.AsyncClient,
    sample_id: str | None = None,
) -> ChatResponse:
    """POST one request and decode the reply.

    Args:
        endpoint: Target endpoint.
        request: Document produced by ``build_request``.
        timeout_s: Read/write/pool timeout of this attempt.
        http: Shared HTTP client.
        sample_id: Sent as ``X-Sample-Id`` so servers can key per-sample state.

    Returns:
        Decoded response with measured latency.

    Raises:
        RequestTimeoutError: No reply within ``timeout_s``.
        EndpointConnectionError: Connection refused, reset or failed.
        HttpStatusError: Non-2xx reply, classified by ``classify_status``.
        ResponseDecodeError: Reply is not a chat-completions document.
    """
    headers = {"Content-Type": "application/json"}
    if endpoint.api_key_env:
        token = os.environ.get(endpoint.api_key_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
    if sample_id is not None:
        headers[SAMPLE_ID_HEADER] = sample_id

    url = completion_url(endpoint)
    started = time.monotonic()
    try:
        response = await http.post(
            url,
            content=encode_request_body(request),
            headers=headers,
            timeout=httpx.Timeout(timeout_s, connect=min(timeout_s, get_settings().http_connect_timeout_s)),
        )
    except httpx.TimeoutException as e:
        raise RequestTimeoutError(timeout_s) from e
    except httpx.TransportError as e:
        raise EndpointConnectionError(f"Cannot reach {url}: {e}") from e
    latency_s = time.monotonic() - started

    if not response.is_success:
        raise HttpStatusError(response.status_code, classify_status(response.status_code), response.text[:200])
    return decode_response(response.content, latency_s)
