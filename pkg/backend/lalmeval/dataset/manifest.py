"""JSONL manifest ingestion.

Each non-blank line is one record::

    {"sample_id": "s1",
     "audio": [{"path": "s1.wav", "duration_s": 2.0}],
     "turns": [{"role": "user", "text": "Transcribe.", "audio_index": 0}],
     "reference": {"kind": "plain_text", "value": "hello world"},
     "metadata": {"speaker": "f1"}}

Durations come from the manifest; audio files are only checked for
existence, never decoded.
"""

from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, StrictStr, ValidationError

from lalmeval.config.loader import format_location
from lalmeval.core.logging import get_logger
from lalmeval.domain.errors import DuplicateIdError, ManifestError, ManifestIoError, TranscriptFormatError
from lalmeval.domain.models import AudioRef, ReferenceTarget, SampleRecord, Turn
from lalmeval.metrics.transcripts import parse_speaker_tagged

logger = get_logger(__name__)


class ManifestLine(BaseModel):
    """Wire shape of one manifest line."""

    model_config = ConfigDict(strict=True, extra="forbid")

    sample_id: StrictStr = Field(min_length=1)
    audio: list[AudioRef] = Field(default_factory=list)
    turns: list[Turn] = Field(min_length=1)
    reference: ReferenceTarget
    metadata: dict[StrictStr, StrictStr] = Field(default_factory=dict)


def _describe(error: ValidationError) -> str:
    first = error.errors()[0]
    where = format_location(first["loc"])
    if first["type"] == "missing":
        return f"missing field {where}"
    if first["type"] == "json_invalid":
        return f"invalid JSON ({first['msg']})"
    return f"{where}: {first['msg'].removeprefix('Value error, ')}"


def _resolve_audio(path: str, base_dir: Path) -> Path:
    candidate = Path(path)
    return candidate if candidate.is_absolute() else base_dir / candidate


def parse_manifest_line(raw: str, line_no: int, base_dir: Path, check_audio: bool = True) -> SampleRecord:
    """Parse one manifest line into a sample.

    Args:
        raw: JSON text of the line.
        line_no: 1-based line number for error messages.
        base_dir: Directory relative audio paths resolve against.
        check_audio: Verify referenced audio files exist.

    Returns:
        Validated sample record.

    Raises:
        ManifestError: Malformed line.
    """
    try:
        line = ManifestLine.model_validate_json(raw)
    except ValidationError as e:
        raise ManifestError(line_no, _describe(e)) from e

    audio_paths: list[str] = []
    for ref in line.audio:
        resolved = _resolve_audio(ref.path, base_dir)
        if check_audio and not resolved.is_file():
            raise ManifestError(line_no, f"audio file not found: {resolved}")
        audio_paths.append(str(resolved))

    if line.reference.kind == "speaker_tagged":
        try:
            parse_speaker_tagged(line.reference.value)
        except TranscriptFormatError as e:
            raise ManifestError(line_no, f"reference: {e.message}") from e

    try:
        return SampleRecord(
            sample_id=line.sample_id,
            audio_paths=audio_paths,
            audio_duration_s=sum(ref.duration_s for ref in line.audio),
            turns=line.turns,
            reference=line.reference,
            metadata=line.metadata,
        )
    except ValidationError as e:
        raise ManifestError(line_no, _describe(e)) from e


def load_manifest(path: str | Path, check_audio: bool = True) -> list[SampleRecord]:
    """Load every record of a manifest, in file order.

    Args:
        path: JSONL manifest file.
        check_audio: Verify referenced audio files exist.

    Returns:
        Sample records in file order.

    Raises:
        ManifestIoError: The file cannot be read.
        ManifestError: A line is malformed (carries the line number).
        DuplicateIdError: Two lines share a sample_id.
    """
    manifest = Path(path)
    try:
        text = manifest.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ManifestIoError(str(manifest), str(e)) from e

    samples: list[SampleRecord] = []
    seen: set[str] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        sample = parse_manifest_line(raw, line_no, manifest.parent, check_audio=check_audio)
        if sample.sample_id in seen:
            raise DuplicateIdError(sample.sample_id, line_no)
        seen.add(sample.sample_id)
        samples.append(sample)

    logger.debug("Loaded %d samples from %s", len(samples), manifest)
    return samples
