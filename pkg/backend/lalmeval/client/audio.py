"""Audio payload encoding.

Audio is sent as base64 WAV inside ``input_audio`` content parts. Endpoints
with an ``audio_chunk_s`` limit receive long files split on sample
boundaries into several consecutive parts of one message; every part is a
standalone WAV and the PCM payloads concatenate back to the original.
"""

import base64
import io
import math
import wave
from pathlib import Path

from lalmeval.domain.errors import AudioFormatError, AudioIoError
from lalmeval.domain.models import ContentPart

SAMPLE_RATE = 16_000
SAMPLE_WIDTH = 2
CHANNELS = 1


def read_pcm(path: str | Path) -> bytes:
    """Read the PCM payload of a 16 kHz, 16-bit, mono WAV file.

    Args:
        path: WAV file.

    Returns:
        Raw little-endian PCM frames.

    Raises:
        AudioIoError: The file cannot be read.
        AudioFormatError: The file is not a WAV of the expected format.
    """
    try:
        with wave.open(str(path), "rb") as reader:
            if reader.getcomptype() != "NONE":
                raise AudioFormatError(str(path), "compressed WAV")
            if reader.getnchannels() != CHANNELS:
                raise AudioFormatError(str(path), f"{reader.getnchannels()} channels, expected mono")
            if reader.getsampwidth() != SAMPLE_WIDTH:
                raise AudioFormatError(str(path), f"{8 * reader.getsampwidth()}-bit samples, expected 16-bit")
            if reader.getframerate() != SAMPLE_RATE:
                raise AudioFormatError(str(path), f"{reader.getframerate()} Hz, expected {SAMPLE_RATE} Hz")
            return reader.readframes(reader.getnframes())
    except (wave.Error, EOFError) as e:
        raise AudioFormatError(str(path), f"not a PCM WAV file ({e})") from e
    except OSError as e:
        raise AudioIoError(str(path), str(e)) from e


def pcm_to_wav(pcm: bytes) -> bytes:
    """Wrap PCM frames in a WAV container of the expected format."""
    buffer = io.BytesIO()
    with wave.open(buffer, "wb") as writer:
        writer.setnchannels(CHANNELS)
        writer.setsampwidth(SAMPLE_WIDTH)
        writer.setframerate(SAMPLE_RATE)
        writer.writeframes(pcm)
    return buffer.getvalue()


def split_pcm(pcm: bytes, chunk_s: float | None) -> list[bytes]:
    """Split PCM frames into chunks of at most ``chunk_s`` seconds.

    Args:
        pcm: 16-bit mono PCM frames.
        chunk_s: Chunk length; None disables splitting.

    Returns:
        Consecutive chunks whose concatenation equals ``pcm``.
    """
    frames = len(pcm) // SAMPLE_WIDTH
    if chunk_s is None:
        return [pcm]
    if chunk_s <= 0:
        raise ValueError(f"chunk_s must be > 0, got {chunk_s}")
    frames_per_chunk = max(1, round(chunk_s * SAMPLE_RATE))
    if frames <= frames_per_chunk:
        return [pcm]
    step = frames_per_chunk * SAMPLE_WIDTH
    return [pcm[i * step : (i + 1) * step] for i in range(math.ceil(frames / frames_per_chunk))]


def encode_audio_part(path: str | Path, chunk_s: float | None = None) -> list[ContentPart]:
    """Encode an audio file as one or more ``input_audio`` parts.

    Args:
        path: 16 kHz, 16-bit, mono WAV file.
        chunk_s: Endpoint chunk size; None sends the file whole.

    Returns:
        Ordered content parts, one per chunk.

    Raises:
        AudioIoError: The file cannot be read.
        AudioFormatError: Wrong sample rate, width or channel count.
    """
    pcm = read_pcm(path)
    chunks = split_pcm(pcm, chunk_s)
    if len(chunks) == 1:
        # Unchunked audio goes out bit-exact, header included.
        try:
            payload = Path(path).read_bytes()
        except OSError as e:
            raise AudioIoError(str(path), str(e)) from e
        return [ContentPart.of_audio(base64.b64encode(payload).decode("ascii"))]
    return [ContentPart.of_audio(base64.b64encode(pcm_to_wav(chunk)).decode("ascii")) for chunk in chunks]
