"""Speaker-attributed word error metrics: WDER and cpWER."""

from collections.abc import Mapping

import editdistance

from lalmeval.domain.errors import EmptyReferenceError, NoAlignedPairsError
from lalmeval.metrics.alignment import align
from lalmeval.metrics.assignment import MatchMethod, min_cost_matching
from lalmeval.metrics.transcripts import SpeakerTaggedTranscript


def best_speaker_map(
    ref: SpeakerTaggedTranscript, hyp: SpeakerTaggedTranscript, method: MatchMethod = "auto"
) -> dict[str, str]:
    """Hyp-to-ref label bijection maximizing agreement over aligned words.

    Hyp labels left without a partner (more hyp than ref speakers) are
    absent from the map and count as disagreements.

    Raises:
        NoAlignedPairsError: No word of ``hyp`` aligns with ``ref``.
    """
    pairs = align(ref.text, hyp.text).pairs
    if not pairs:
        raise NoAlignedPairsError()
    hyp_labels = hyp.speakers
    ref_labels = ref.speakers
    agree = [[0] * len(ref_labels) for _ in hyp_labels]
    hyp_pos = {label: i for i, label in enumerate(hyp_labels)}
    ref_pos = {label: j for j, label in enumerate(ref_labels)}
    for r, h in pairs:
        agree[hyp_pos[hyp.words[h].speaker]][ref_pos[ref.words[r].speaker]] += 1

    # Minimizing disagreements on each matched label pair maximizes agreement.
    cost = [[len(pairs) - count for count in row] for row in agree]
    _, matched = min_cost_matching(cost, method)
    return {hyp_labels[i]: ref_labels[j] for i, j in matched}


def wder(
    ref: SpeakerTaggedTranscript,
    hyp: SpeakerTaggedTranscript,
    speaker_map: Mapping[str, str] | None = None,
    method: MatchMethod = "auto",
) -> float:
    """Word diarization error rate.

    Words are aligned speaker-blind; among aligned pairs (matches and
    substitutions) the rate is the share whose hyp speaker, mapped through
    ``speaker_map``, differs from the ref speaker. Insertions and deletions
    do not count.

    Args:
        ref: Reference transcript.
        hyp: Hypothesis transcript.
        speaker_map: Hyp-to-ref label map; the minimizing bijection when None.
        method: Search method for the minimizing bijection.

    Raises:
        NoAlignedPairsError: No word of ``hyp`` aligns with ``ref``.
    """
    pairs = align(ref.text, hyp.text).pairs
    if not pairs:
        raise NoAlignedPairsError()
    mapping = dict(speaker_map) if speaker_map is not None else best_speaker_map(ref, hyp, method)
    wrong = sum(1 for r, h in pairs if mapping.get(hyp.words[h].speaker) != ref.words[r].speaker)
    return wrong / len(pairs)


def cpwer(ref: SpeakerTaggedTranscript, hyp: SpeakerTaggedTranscript, method: MatchMethod = "auto") -> float:
    """Concatenated minimum-permutation word error rate.

    Each speaker's words are concatenated; ref and hyp speakers are paired
    one-to-one (unpaired speakers face an empty transcript) so that the
    summed word edit distance is minimal, and the sum is divided by the
    total number of reference words.

    Raises:
        EmptyReferenceError: The reference has no words.
    """
    ref_groups = list(ref.by_speaker().values())
    hyp_groups = list(hyp.by_speaker().values())
    ref_words = sum(len(words) for words in ref_groups)
    if ref_words == 0:
        raise EmptyReferenceError()

    size = max(len(ref_groups), len(hyp_groups))
    padded_ref = ref_groups + [[]] * (size - len(ref_groups))
    padded_hyp = hyp_groups + [[]] * (size - len(hyp_groups))
    cost = [[int(editdistance.eval(r, h)) for h in padded_hyp] for r in padded_ref]
    total, _ = min_cost_matching(cost, method)
    return total / ref_words
