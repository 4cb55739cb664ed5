"""Speaker-tagged transcripts.

Speaker turns are marked inline with ``<spk:LABEL>`` tags; every word up to
the next tag belongs to that speaker::

    transcript := [words] (tag words)*
    tag        := "<spk:" LABEL ">"
    LABEL      := [A-Za-z0-9_.-]+

Words before the first tag are attributed to ``spk0``. Tags may touch the
following word (``<spk:A>hello``).
"""

import re
from dataclasses import dataclass

from lalmeval.domain.errors import TranscriptFormatError
from lalmeval.metrics.text import NormalizedText, normalize_text

DEFAULT_SPEAKER = "spk0"
_TAG = re.compile(r"<spk:([A-Za-z0-9_.-]+)>")


@dataclass(frozen=True)
class TaggedWord:
    """A normalized word and its speaker label."""

    token: str
    speaker: str


@dataclass(frozen=True)
class SpeakerTaggedTranscript:
    """Ordered words annotated with speaker labels."""

    words: tuple[TaggedWord, ...]

    @property
    def text(self) -> NormalizedText:
        """The words without speaker information."""
        return NormalizedText(tuple(w.token for w in self.words))

    @property
    def speakers(self) -> list[str]:
        """Distinct labels in order of first appearance."""
        return list(dict.fromkeys(w.speaker for w in self.words))

    def by_speaker(self) -> dict[str, list[str]]:
        """Each speaker's words, concatenated in transcript order."""
        grouped: dict[str, list[str]] = {}
        for word in self.words:
            grouped.setdefault(word.speaker, []).append(word.token)
        return grouped

    @classmethod
    def of(cls, *pairs: tuple[str, str]) -> "SpeakerTaggedTranscript":
        """Build a transcript from (token, speaker) pairs."""
        return cls(tuple(TaggedWord(token, speaker) for token, speaker in pairs))


def _add_words(words: list[TaggedWord], segment: str, speaker: str) -> None:
    if "<spk" in segment:
        raise TranscriptFormatError(f"Malformed speaker tag near {segment.strip()[:40]!r}")
    words.extend(TaggedWord(token, speaker) for token in normalize_text(segment).tokens)


def parse_speaker_tagged(text: str) -> SpeakerTaggedTranscript:
    """Parse a ``<spk:LABEL>`` tagged transcript.

    Raises:
        TranscriptFormatError: A tag is malformed (bad label or unclosed).
    """
    words: list[TaggedWord] = []
    speaker = DEFAULT_SPEAKER
    position = 0
    for tag in _TAG.finditer(text):
        _add_words(words, text[position : tag.start()], speaker)
        speaker = tag.group(1)
        position = tag.end()
    _add_words(words, text[position:], speaker)
    return SpeakerTaggedTranscript(tuple(words))


def serialize_speaker_tagged(transcript: SpeakerTaggedTranscript) -> str:
    """Render a transcript with a tag at every speaker change."""
    pieces: list[str] = []
    current: str | None = None
    for word in transcript.words:
        if word.speaker != current:
            pieces.append(f"<spk:{word.speaker}>")
            current = word.speaker
        pieces.append(word.token)
    return " ".join(pieces)
