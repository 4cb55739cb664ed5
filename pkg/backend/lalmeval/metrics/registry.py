"""Registry of per-sample metrics.

Each metric declares its scale, the reference kinds it can score and
whether it needs a judge endpoint. Local metrics are computed here; judge
metrics are dispatched by ``lalmeval.metrics.scoring``.
"""

from collections.abc import Callable
from dataclasses import dataclass
from typing import Literal

from lalmeval.domain.errors import MetricInputError
from lalmeval.domain.models import ReferenceKind, ReferenceTarget, Scale
from lalmeval.metrics.alignment import wer
from lalmeval.metrics.diarization import cpwer, wder
from lalmeval.metrics.match import structured_match_score
from lalmeval.metrics.text import NormalizedText, normalize_text
from lalmeval.metrics.transcripts import parse_speaker_tagged

LocalScorer = Callable[[ReferenceTarget, str], float]
JudgeSelector = Literal["binary", "detailed", "task"]


@dataclass(frozen=True)
class MetricDef:
    """Static description of a metric.

    Attributes:
        name: Registered metric name.
        scale: ``fraction`` or ``percent``.
        reference_kinds: Reference kinds the metric accepts.
        judge_mode: Verdict format for judge metrics; None for local metrics,
            ``"task"`` when the task's JudgeSpec decides.
        scorer: Local scoring function (reference, hypothesis) -> value.
    """

    name: str
    scale: Scale
    reference_kinds: frozenset[ReferenceKind]
    judge_mode: JudgeSelector | None = None
    scorer: LocalScorer | None = None

    @property
    def needs_judge(self) -> bool:
        """Whether scoring calls a judge endpoint."""
        return self.judge_mode is not None

    def check_reference(self, kind: str) -> None:
        """Reject reference kinds the metric cannot score.

        Raises:
            MetricInputError: ``kind`` is not accepted.
        """
        if kind not in self.reference_kinds:
            raise MetricInputError(self.name, kind)


def _words(reference: ReferenceTarget, text: str) -> NormalizedText:
    if reference.kind == "speaker_tagged":
        return parse_speaker_tagged(text).text
    return normalize_text(text)


def _wer(reference: ReferenceTarget, hypothesis: str) -> float:
    return wer(_words(reference, reference.value), _words(reference, hypothesis))


def _wder(reference: ReferenceTarget, hypothesis: str) -> float:
    return wder(parse_speaker_tagged(reference.value), parse_speaker_tagged(hypothesis))


def _cpwer(reference: ReferenceTarget, hypothesis: str) -> float:
    return cpwer(parse_speaker_tagged(reference.value), parse_speaker_tagged(hypothesis))


def _exact(reference: ReferenceTarget, hypothesis: str) -> float:
    return 100.0 * structured_match_score(reference.value, hypothesis, "verbatim")


def _normalized(reference: ReferenceTarget, hypothesis: str) -> float:
    return 100.0 * structured_match_score(reference.value, hypothesis, "whitespace_case_fold")


_TEXTUAL: frozenset[ReferenceKind] = frozenset({"plain_text", "structured"})

REGISTRY: dict[str, MetricDef] = {
    m.name: m
    for m in (
        MetricDef("wer", "fraction", frozenset({"plain_text", "speaker_tagged"}), scorer=_wer),
        MetricDef("wder", "fraction", frozenset({"speaker_tagged"}), scorer=_wder),
        MetricDef("cpwer", "fraction", frozenset({"speaker_tagged"}), scorer=_cpwer),
        MetricDef("exact_match", "percent", _TEXTUAL, scorer=_exact),
        MetricDef("normalized_match", "percent", _TEXTUAL, scorer=_normalized),
        MetricDef("llm_judge", "percent", _TEXTUAL, judge_mode="task"),
        MetricDef("llm_judge_binary", "percent", _TEXTUAL, judge_mode="binary"),
        MetricDef("llm_judge_detailed", "percent", _TEXTUAL, judge_mode="detailed"),
    )
}


def get_metric(name: str) -> MetricDef:
    """Look up a registered metric.

    Raises:
        KeyError: Unknown metric name.
    """
    return REGISTRY[name]
