"""Builders for configuration, dataset and audio test inputs."""

import json
import wave
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from lalmeval.domain.models import EndpointSpec, ReferenceTarget, SampleRecord, TaskSpec, Turn

UNREACHABLE_URL = "http://127.0.0.1:9/v1"


def write_wav(
    path: Path,
    seconds: float,
    *,
    rate: int = 16_000,
    channels: int = 1,
    width: int = 2,
) -> Path:
    """Write a WAV file with a deterministic ramp as payload."""
    size = round(seconds * rate) * width * channels
    payload = bytes(i % 251 for i in range(size))
    with wave.open(str(path), "wb") as writer:
        writer.setnchannels(channels)
        writer.setsampwidth(width)
        writer.setframerate(rate)
        writer.writeframes(payload)
    return path


def endpoint(name: str = "m1", base_url: str = UNREACHABLE_URL, **overrides: Any) -> EndpointSpec:
    """Endpoint with fast-failing defaults."""
    fields: dict[str, Any] = {"name": name, "base_url": base_url, "model_id": "mock", "timeout_s": 5.0}
    fields.update(overrides)
    return EndpointSpec(**fields)


def task(
    name: str = "asr",
    category: str = "Speech Recognition",
    metrics: Sequence[str] = ("wer",),
    **overrides: Any,
) -> TaskSpec:
    """Task over ``{name}.jsonl``."""
    fields: dict[str, Any] = {
        "task_name": name,
        "category": category,
        "dataset_path": f"{name}.jsonl",
        "metric_names": list(metrics),
    }
    fields.update(overrides)
    return TaskSpec(**fields)


def sample(
    sample_id: str,
    text: str = "hello world",
    reference: str = "hello world",
    *,
    kind: str = "plain_text",
    turns: Sequence[str] | None = None,
    duration_s: float = 0.0,
    metadata: dict[str, str] | None = None,
) -> SampleRecord:
    """Text-only sample; ``turns`` lists the texts of several user turns."""
    texts = list(turns) if turns is not None else [text]
    return SampleRecord(
        sample_id=sample_id,
        audio_duration_s=duration_s,
        turns=[Turn(role="user", text=t) for t in texts],
        reference=ReferenceTarget(kind=kind, value=reference),  # type: ignore[arg-type]
        metadata=metadata or {},
    )


def manifest_line(
    sample_id: str,
    text: str = "hello world",
    reference: str = "hello world",
    *,
    kind: str = "plain_text",
    audio: list[dict[str, Any]] | None = None,
    metadata: dict[str, str] | None = None,
) -> dict[str, Any]:
    """One manifest record as a JSON-ready dict."""
    turn: dict[str, Any] = {"role": "user", "text": text}
    if audio:
        turn["audio_index"] = 0
    line: dict[str, Any] = {
        "sample_id": sample_id,
        "turns": [turn],
        "reference": {"kind": kind, "value": reference},
    }
    if audio is not None:
        line["audio"] = audio
    if metadata is not None:
        line["metadata"] = metadata
    return line


def write_manifest(path: Path, lines: Sequence[dict[str, Any] | str]) -> Path:
    """Write records (dicts, or raw strings taken verbatim) one per line."""
    rows = [line if isinstance(line, str) else json.dumps(line) for line in lines]
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


def config_yaml(base_url: str, **knobs: Any) -> str:
    """Run configuration with one endpoint and one ASR task over ``asr.jsonl``."""
    capacity = knobs.get("capacity", 4)
    retry_limit = knobs.get("retry_limit", 0)
    extra = "".join(f"{key}: {value}\n" for key, value in knobs.get("top", {}).items())
    return (
        "endpoints:\n"
        "  - name: m1\n"
        f"    base_url: {base_url}\n"
        "    model_id: mock\n"
        f"    capacity: {capacity}\n"
        f"    retry_limit: {retry_limit}\n"
        "    timeout_s: 5.0\n"
        "tasks:\n"
        "  - task_name: asr\n"
        "    category: Speech Recognition\n"
        "    dataset_path: asr.jsonl\n"
        "    metric_names: [wer]\n"
        "  - task_name: sql\n"
        "    category: Spoken Language Understanding\n"
        "    dataset_path: sql.jsonl\n"
        "    metric_names: [exact_match, normalized_match]\n" + extra
    )
