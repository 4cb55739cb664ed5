"""Chat-completions request construction.

A request is built in two steps: the user turn is rendered into a
ChatMessage (template substitution plus audio parts), then the message is
appended to the conversation history and serialized into the
OpenAI-compatible request document.
"""

import json
from collections.abc import Sequence
from typing import Any

from lalmeval.client.audio import encode_audio_part
from lalmeval.domain.errors import RequestBuildError, TemplateError
from lalmeval.domain.models import (
    ChatMessage,
    ContentPart,
    EffectiveSettings,
    SampleRecord,
    Turn,
    template_placeholders,
)


def render_turn_text(template: str, turn: Turn, sample: SampleRecord) -> str:
    """Substitute a turn into the task prompt template.

    Available placeholders are ``{text}`` (the turn text, empty for
    audio-only turns), ``{sample_id}`` and every metadata key of the
    sample.

    Raises:
        TemplateError: The template names an unknown placeholder.
    """
    values: dict[str, str] = dict(sample.metadata)
    values["sample_id"] = sample.sample_id
    values["text"] = turn.text or ""
    for name in template_placeholders(template):
        if name not in values:
            raise TemplateError(name, sample.sample_id)
    return template.format(**values)


def build_user_message(
    turn: Turn,
    sample: SampleRecord,
    template: str,
    audio_chunk_s: float | None = None,
) -> ChatMessage:
    """Render one user turn as a chat message.

    The rendered text comes first, followed by the turn's audio as one or
    more ``input_audio`` parts. An empty rendering is dropped when the turn
    carries audio.

    Raises:
        TemplateError: Unknown placeholder.
        AudioIoError: Audio file unreadable.
        AudioFormatError: Audio not 16 kHz, 16-bit, mono.
    """
    text = render_turn_text(template, turn, sample)
    parts: list[ContentPart] = []
    if text or turn.audio_index is None:
        parts.append(ContentPart.of_text(text))
    if turn.audio_index is not None:
        parts.extend(encode_audio_part(sample.audio_paths[turn.audio_index], audio_chunk_s))
    return ChatMessage(role="user", parts=parts)


def assistant_message(text: str) -> ChatMessage:
    """Wrap a model reply for the conversation history."""
    return ChatMessage(role="assistant", parts=[ContentPart.of_text(text)])


def check_history(history: Sequence[ChatMessage]) -> None:
    """Validate that a history alternates user and assistant messages.

    The history must start with a user message and end with an assistant
    reply so that the next user message keeps the alternation.

    Raises:
        RequestBuildError: On a system message, or broken alternation.
    """
    for index, message in enumerate(history):
        expected = "user" if index % 2 == 0 else "assistant"
        if message.role != expected:
            raise RequestBuildError(f"history[{index}] has role '{message.role}', expected '{expected}'")
    if len(history) % 2 != 0:
        raise RequestBuildError("history must end with an assistant message")


def part_to_wire(part: ContentPart) -> dict[str, Any]:
    """Serialize a content part in the chat-completions format."""
    if part.kind == "text":
        return {"type": "text", "text": part.text}
    return {"type": "input_audio", "input_audio": {"data": part.audio_b64, "format": part.audio_format}}


def message_to_wire(message: ChatMessage) -> dict[str, Any]:
    """Serialize a chat message.

    Single text parts of system and assistant messages are sent as plain
    strings, which every compatible server accepts.
    """
    if message.role != "user" and len(message.parts) == 1 and message.parts[0].kind == "text":
        return {"role": message.role, "content": message.parts[0].text}
    return {"role": message.role, "content": [part_to_wire(p) for p in message.parts]}


def assemble_request(
    message: ChatMessage,
    *,
    history: Sequence[ChatMessage],
    settings: EffectiveSettings,
    model_id: str,
    system_prompt: str | None = None,
) -> dict[str, Any]:
    """Assemble a request document from an already rendered user message.

    Args:
        message: The new user message.
        history: Earlier user/assistant exchanges of the conversation.
        settings: Effective request settings.
        model_id: Model identifier of the endpoint.
        system_prompt: Optional system message placed first.

    Returns:
        JSON-serializable request document.

    Raises:
        RequestBuildError: The message is not a user message or the history
            does not alternate.
    """
    if message.role != "user":
        raise RequestBuildError(f"new message must come from the user, got '{message.role}'")
    check_history(history)

    messages: list[dict[str, Any]] = []
    if system_prompt:
        messages.append({"role": "system", "content": system_prompt})
    messages.extend(message_to_wire(m) for m in history)
    messages.append(message_to_wire(message))
    return {
        "model": model_id,
        "messages": messages,
        "temperature": settings.temperature,
        "max_tokens": settings.max_tokens,
    }


def build_request(
    turn: Turn,
    sample: SampleRecord,
    *,
    template: str,
    history: Sequence[ChatMessage],
    settings: EffectiveSettings,
    model_id: str,
    system_prompt: str | None = None,
) -> dict[str, Any]:
    """Render a user turn and build its request document.

    Audio is chunked according to ``settings.audio_chunk_s``.

    Raises:
        TemplateError: Unknown placeholder.
        AudioIoError: Audio file unreadable.
        AudioFormatError: Audio not 16 kHz, 16-bit, mono.
        RequestBuildError: History does not alternate.
    """
    message = build_user_message(turn, sample, template, settings.audio_chunk_s)
    return assemble_request(
        message, history=history, settings=settings, model_id=model_id, system_prompt=system_prompt
    )


def encode_request_body(request: dict[str, Any]) -> bytes:
    """Encode a request document as compact UTF-8 JSON."""
    return json.dumps(request, ensure_ascii=False, separators=(",", ":")).encode("utf-8")

