"""Text normalization for word-level scoring."""

import unicodedata
from dataclasses import dataclass

_APOSTROPHES = {"’": "'", "‘": "'", "ʼ": "'"}


@dataclass(frozen=True)
class NormalizedText:
    """Lowercase word tokens of a transcript.

    Attributes:
        tokens: Non-empty words, free of punctuation except intra-word apostrophes.
    """

    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def of(cls, *tokens: str) -> "NormalizedText":
        """Wrap already normalized tokens."""
        return cls(tuple(tokens))


def _is_punct(char: str) -> bool:
    return unicodedata.category(char).startswith("P")


def normalize_token(word: str) -> str:
    """Normalize a single whitespace-delimited word.

    Punctuation is dropped, except apostrophes with a letter or digit on
    both sides (``don't``, ``o'clock``).
    """
    word = "".join(_APOSTROPHES.get(c, c) for c in word.lower())
    kept: list[str] = []
    for i, char in enumerate(word):
        if char == "'":
            if 0 < i < len(word) - 1 and word[i - 1].isalnum() and word[i + 1].isalnum():
                kept.append(char)
        elif not _is_punct(char):
            kept.append(char)
    return "".join(kept)


def normalize_text(raw: str) -> NormalizedText:
    """Lowercase, strip punctuation and split a transcript into words.

    Example:
        >>> normalize_text("Hello, World!").tokens
        ('hello', 'world')
    """
    tokens = (normalize_token(word) for word in raw.split())
    return NormalizedText(tuple(token for token in tokens if token))
