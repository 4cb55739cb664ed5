"""Levenshtein word alignment and word error rate."""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

from lalmeval.domain.errors import EmptyReferenceError
from lalmeval.metrics.text import NormalizedText

OpKind = Literal["match", "substitute", "delete", "insert"]


@dataclass(frozen=True)
class AlignOp:
    """One edit operation.

    ``ref_index`` is None for insertions, ``hyp_index`` for deletions.
    """

    kind: OpKind
    ref_index: int | None
    hyp_index: int | None


@dataclass(frozen=True)
class Alignment:
    """Minimal-cost alignment of a reference and a hypothesis."""

    ops: tuple[AlignOp, ...]

    def count(self, kind: OpKind) -> int:
        """Number of operations of ``kind``."""
        return sum(1 for op in self.ops if op.kind == kind)

    @property
    def cost(self) -> int:
        """Substitutions plus deletions plus insertions."""
        return sum(1 for op in self.ops if op.kind != "match")

    @property
    def pairs(self) -> list[tuple[int, int]]:
        """Aligned (ref_index, hyp_index) pairs: matches and substitutions."""
        return [
            (op.ref_index, op.hyp_index)
            for op in self.ops
            if op.ref_index is not None and op.hyp_index is not None
        ]


def edit_table(ref: Sequence[str], hyp: Sequence[str]) -> list[list[int]]:
    """Levenshtein DP table; ``table[i][j]`` is the distance of ref[:i] and hyp[:j]."""
    rows, cols = len(ref) + 1, len(hyp) + 1
    table = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        table[i][0] = i
    for j in range(cols):
        table[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            diagonal = table[i - 1][j - 1] + (0 if ref[i - 1] == hyp[j - 1] else 1)
            table[i][j] = min(diagonal, table[i - 1][j] + 1, table[i][j - 1] + 1)
    return table


def align_tokens(ref: Sequence[str], hyp: Sequence[str]) -> Alignment:
    """Align two token sequences.

    Among equal-cost paths the traceback prefers match, then substitution,
    then deletion, then insertion, so the result is deterministic.
    """
    table = edit_table(ref, hyp)
    ops: list[AlignOp] = []
    i, j = len(ref), len(hyp)
    while i > 0 or j > 0:
        here = table[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and table[i - 1][j - 1] == here:
            ops.append(AlignOp("match", i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and table[i - 1][j - 1] + 1 == here:
            ops.append(AlignOp("substitute", i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and table[i - 1][j] + 1 == here:
            ops.append(AlignOp("delete", i - 1, None))
            i -= 1
        else:
            ops.append(AlignOp("insert", None, j - 1))
            j -= 1
    ops.reverse()
    return Alignment(tuple(ops))


def align(ref: NormalizedText, hyp: NormalizedText) -> Alignment:
    """Word-level Levenshtein alignment of normalized transcripts.

    Example:
        >>> [op.kind for op in align(NormalizedText.of("a", "b"), NormalizedText.of("a")).ops]
        ['match', 'delete']
    """
    return align_tokens(ref.tokens, hyp.tokens)


def wer(ref: NormalizedText, hyp: NormalizedText) -> float:
    """Word error rate ``(S + D + I) / |ref|``.

    Raises:
        EmptyReferenceError: The reference has no words.
    """
    if len(ref) == 0:
        raise EmptyReferenceError()
    return align(ref, hyp).cost / len(ref)
