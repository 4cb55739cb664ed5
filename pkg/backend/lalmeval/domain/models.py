"""Pydantic models for the evaluation harness.

All models use strict mode so configuration typos and wrong types fail
loudly instead of being coerced. Configuration models additionally forbid
unknown keys and are frozen, which makes a validated run configuration safe
to share across tasks.
"""

import string
from typing import Any, Literal, Self, get_args

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    StrictInt,
    StrictStr,
    field_validator,
    model_validator,
)
from pydantic_core import PydanticCustomError

SCHEMA_VERSION = 1

Category = Literal[
    "Speech Recognition",
    "Paralinguistics",
    "Audio Understanding",
    "Spoken Language Understanding",
    "Spoken Language Reasoning",
    "Safety & Security",
]
CATEGORIES: tuple[str, ...] = get_args(Category)

MetricName = Literal[
    "wer",
    "wder",
    "cpwer",
    "exact_match",
    "normalized_match",
    "llm_judge",
    "llm_judge_binary",
    "llm_judge_detailed",
]
METRIC_NAMES: tuple[str, ...] = get_args(MetricName)
JUDGE_METRICS = frozenset({"llm_judge", "llm_judge_binary", "llm_judge_detailed"})

JudgeMode = Literal["binary", "detailed"]
Dimension = Literal["task", "category", "model", "metric"]
Reducer = Literal["mean", "weighted_mean_by_sample_count"]
ReferenceKind = Literal["plain_text", "speaker_tagged", "structured"]
TurnRole = Literal["user", "assistant-reference"]
MessageRole = Literal["system", "user", "assistant"]
Scale = Literal["fraction", "percent"]

_STRICT = ConfigDict(strict=True)
_CONFIG = ConfigDict(strict=True, frozen=True, extra="forbid")


def template_placeholders(template: str) -> list[str]:
    """List the placeholder names of a ``str.format`` style template.

    Args:
        template: Template text such as ``"Transcribe: {text}"``.

    Returns:
        Placeholder names in order of appearance.

    Raises:
        ValueError: If the template is malformed or uses positional,
            attribute or index placeholders.
    """
    names: list[str] = []
    for _, field_name, _, _ in string.Formatter().parse(template):
        if field_name is None:
            continue
        if not field_name.isidentifier():
            raise ValueError(f"placeholder '{{{field_name}}}' must be a bare identifier")
        names.append(field_name)
    return names


# =============================================================================
# Run configuration
# =============================================================================


class EndpointSpec(BaseModel):
    """A reachable model endpoint plus its run limits.

    Attributes:
        name: Unique endpoint identifier.
        base_url: Base URL; requests go to ``{base_url}/chat/completions``.
        model_id: Model identifier sent in the request body.
        api_key_env: Environment variable holding the bearer token.
        capacity: Maximum concurrent requests the endpoint accepts.
        retry_limit: Retries after the first failed attempt.
        timeout_s: Per-attempt timeout.
        retry_wait_s: Fixed wait between attempts.
        audio_chunk_s: Split audio longer than this into several parts.
        temperature: Overrides the task temperature.
        max_tokens: Overrides the task max_tokens.
        group: Replica group; endpoints sharing it serve one model.
    """

    model_config = _CONFIG

    name: StrictStr = Field(min_length=1)
    base_url: StrictStr = Field(min_length=1)
    model_id: StrictStr = Field(min_length=1)
    api_key_env: StrictStr | None = None
    capacity: StrictInt = Field(default=1, ge=1)
    retry_limit: StrictInt = Field(default=2, ge=0)
    timeout_s: float = Field(default=60.0, gt=0)
    retry_wait_s: float = Field(default=0.0, ge=0)
    audio_chunk_s: float | None = Field(default=None, gt=0)
    temperature: float | None = Field(default=None, ge=0, le=2)
    max_tokens: StrictInt | None = Field(default=None, ge=1)
    group: StrictStr | None = None

    @property
    def model_name(self) -> str:
        """Name predictions are attributed to."""
        return self.group or self.name


class JudgeSpec(BaseModel):
    """LLM-as-judge configuration of a task.

    Attributes:
        endpoint: Judge endpoint (not evaluated as a model).
        judge_mode: Verdict format used by the generic ``llm_judge`` metric.
        judge_concurrency: In-flight judge requests allowed.
    """

    model_config = _CONFIG

    endpoint: EndpointSpec
    judge_mode: JudgeMode = "binary"
    judge_concurrency: StrictInt = Field(default=4, ge=1)


class TaskSpec(BaseModel):
    """One evaluation task bound to a dataset manifest."""

    model_config = _CONFIG

    task_name: StrictStr = Field(min_length=1)
    category: Category
    dataset_path: StrictStr = Field(min_length=1)
    metric_names: list[MetricName] = Field(min_length=1)
    temperature: float | None = Field(default=None, ge=0, le=2)
    max_tokens: StrictInt | None = Field(default=None, ge=1)
    prompt_template: StrictStr = "{text}"
    system_prompt: StrictStr | None = None
    multi_turn: bool = False
    judge: JudgeSpec | None = None

    @field_validator("prompt_template")
    @classmethod
    def _check_placeholders(cls, value: str) -> str:
        template_placeholders(value)
        return value

    @model_validator(mode="after")
    def _judge_metrics_need_judge(self) -> Self:
        wanted = sorted(JUDGE_METRICS.intersection(self.metric_names))
        if wanted and self.judge is None:
            raise ValueError(f"metrics {wanted} require a 'judge' section")
        return self


class FilterSpec(BaseModel):
    """Per-task sample filter."""

    model_config = _CONFIG

    min_audio_s: float | None = Field(default=None, ge=0)
    max_audio_s: float | None = Field(default=None, ge=0)
    max_samples: StrictInt | None = Field(default=None, ge=1)
    metadata_equals: dict[StrictStr, StrictStr] | None = None

    @model_validator(mode="after")
    def _ordered_bounds(self) -> Self:
        if self.min_audio_s is not None and self.max_audio_s is not None and self.min_audio_s > self.max_audio_s:
            raise ValueError("min_audio_s must not exceed max_audio_s")
        return self


class AggregationSpec(BaseModel):
    """Dimensions to group scores by and how to reduce them."""

    model_config = _CONFIG

    dimensions: list[Dimension] = Field(min_length=1)
    reducer: Reducer = "mean"

    @field_validator("dimensions")
    @classmethod
    def _unique_dimensions(cls, value: list[str]) -> list[str]:
        if len(set(value)) != len(value):
            raise PydanticCustomError("duplicate_name", "dimensions must not repeat: {dims}", {"dims": value})
        return value


class RunConfig(BaseModel):
    """Complete, validated evaluation run configuration."""

    model_config = _CONFIG

    endpoints: list[EndpointSpec] = Field(min_length=1)
    tasks: list[TaskSpec] = Field(min_length=1)
    filters: dict[StrictStr, FilterSpec] = Field(default_factory=dict)
    aggregations: list[AggregationSpec] = Field(default_factory=list)
    global_permit_limit: StrictInt = Field(default=8, ge=1)
    stagger_ms: float = Field(default=0.0, ge=0)
    output_dir: StrictStr = "results"
    seed: StrictInt = 0

    @field_validator("endpoints")
    @classmethod
    def _unique_endpoint_names(cls, value: list[EndpointSpec]) -> list[EndpointSpec]:
        _reject_duplicates([e.name for e in value], "endpoints", "name")
        return value

    @field_validator("tasks")
    @classmethod
    def _unique_task_names(cls, value: list[TaskSpec]) -> list[TaskSpec]:
        _reject_duplicates([t.task_name for t in value], "tasks", "task_name")
        return value

    @model_validator(mode="after")
    def _filters_reference_tasks(self) -> Self:
        known = {t.task_name for t in self.tasks}
        for task_name in self.filters:
            if task_name not in known:
                raise PydanticCustomError(
                    "unknown_task",
                    "filter references unknown task '{task}'",
                    {"task": task_name, "path": f"filters.{task_name}"},
                )
        return self

    def task(self, task_name: str) -> TaskSpec:
        """Look up a task by name.

        Raises:
            KeyError: If no such task exists.
        """
        for task in self.tasks:
            if task.task_name == task_name:
                return task
        raise KeyError(task_name)


def _reject_duplicates(names: list[str], collection: str, field: str) -> None:
    seen: set[str] = set()
    for index, name in enumerate(names):
        if name in seen:
            raise PydanticCustomError(
                "duplicate_name",
                "duplicate {field} '{name}'",
                {"field": field, "name": name, "path": f"{collection}[{index}].{field}"},
            )
        seen.add(name)


class EffectiveSettings(BaseModel):
    """Request settings after endpoint > task > default resolution."""

    model_config = _CONFIG

    temperature: float
    max_tokens: StrictInt
    timeout_s: float
    retry_limit: StrictInt
    retry_wait_s: float = 0.0
    audio_chunk_s: float | None = None


# =============================================================================
# Dataset
# =============================================================================


class Turn(BaseModel):
    """One conversation turn of a sample.

    Attributes:
        role: ``user`` turns are sent; ``assistant-reference`` turns are not.
        text: Turn text, substituted into the prompt template as ``{text}``.
        audio_index: Index into the sample's audio list.
    """

    model_config = ConfigDict(strict=True, frozen=True, extra="forbid")

    role: TurnRole
    text: StrictStr | None = None
    audio_index: StrictInt | None = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _has_content(self) -> Self:
        if self.text is None and self.audio_index is None:
            raise ValueError("turn needs text or audio_index")
        return self


class ReferenceTarget(BaseModel):
    """Expected output of a sample."""

    model_config = ConfigDict(strict=True, frozen=True, extra="forbid")

    kind: ReferenceKind
    value: StrictStr


class AudioRef(BaseModel):
    """Audio file referenced by a manifest line."""

    model_config = ConfigDict(strict=True, frozen=True, extra="forbid")

    path: StrictStr = Field(min_length=1)
    duration_s: float = Field(ge=0)


class SampleRecord(BaseModel):
    """One evaluation unit.

    Attributes:
        sample_id: Unique within the manifest.
        audio_paths: Resolved audio file paths.
        audio_duration_s: Sum of the per-file durations.
        turns: Conversation turns, at least one of them a user turn.
        reference: Expected output.
        metadata: Free-form string fields, also usable as template placeholders.
    """

    model_config = ConfigDict(strict=True, frozen=True, extra="forbid")

    sample_id: StrictStr = Field(min_length=1)
    audio_paths: list[StrictStr] = Field(default_factory=list)
    audio_duration_s: float = Field(default=0.0, ge=0)
    turns: list[Turn] = Field(min_length=1)
    reference: ReferenceTarget
    metadata: dict[StrictStr, StrictStr] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _turns_consistent(self) -> Self:
        for turn in self.turns:
            if turn.audio_index is not None and turn.audio_index >= len(self.audio_paths):
                raise ValueError(f"audio_index {turn.audio_index} out of range ({len(self.audio_paths)} audio files)")
        if not any(turn.role == "user" for turn in self.turns):
            raise ValueError("sample needs at least one user turn")
        return self

    @property
    def user_turns(self) -> list[Turn]:
        """Turns that are sent to the model."""
        return [turn for turn in self.turns if turn.role == "user"]

    @property
    def question(self) -> str:
        """Text of the user turns, used as judge context."""
        return "\n".join(turn.text for turn in self.user_turns if turn.text)


class Shard(BaseModel):
    """Disjoint slice of a dataset assigned to one endpoint."""

    model_config = ConfigDict(strict=True, frozen=True)

    endpoint_name: StrictStr
    samples: list[SampleRecord]


# =============================================================================
# Wire protocol
# =============================================================================


class ContentPart(BaseModel):
    """One element of a message ``content`` array."""

    model_config = ConfigDict(strict=True, frozen=True)

    kind: Literal["text", "input_audio"]
    text: StrictStr | None = None
    audio_b64: StrictStr | None = None
    audio_format: Literal["wav"] | None = None

    @model_validator(mode="after")
    def _fields_match_kind(self) -> Self:
        if self.kind == "text":
            ok = self.text is not None and self.audio_b64 is None and self.audio_format is None
        else:
            ok = self.text is None and self.audio_b64 is not None and self.audio_format == "wav"
        if not ok:
            raise ValueError(f"content part fields do not match kind '{self.kind}'")
        return self

    @classmethod
    def of_text(cls, text: str) -> "ContentPart":
        """Build a text part."""
        return cls(kind="text", text=text)

    @classmethod
    def of_audio(cls, audio_b64: str) -> "ContentPart":
        """Build an input_audio part from base64 WAV bytes."""
        return cls(kind="input_audio", audio_b64=audio_b64, audio_format="wav")


class ChatMessage(BaseModel):
    """A chat message made of ordered content parts."""

    model_config = ConfigDict(strict=True, frozen=True)

    role: MessageRole
    parts: list[ContentPart] = Field(min_length=1)


class ChatResponse(BaseModel):
    """Decoded first choice of a chat-completions response."""

    model_config = _STRICT

    text: StrictStr
    finish_reason: StrictStr
    latency_s: float = Field(ge=0)
    prompt_tokens: StrictInt | None = None
    completion_tokens: StrictInt | None = None


# =============================================================================
# Predictions and scores
# =============================================================================


class RawPrediction(BaseModel):
    """Model outputs for one (sample, model) pair.

    Attributes:
        sample_id: Sample identifier.
        model_name: Model (endpoint group) that produced the outputs.
        turn_outputs: One output per user turn; empty when ``error`` is set.
        latency_s: Request wall clock summed over turns.
        attempts: Attempts made across all turns.
        audio_duration_s: Copied from the sample.
        finished_offset_s: Completion time relative to the run start.
        error: Terminal error description.
    """

    model_config = _STRICT

    sample_id: StrictStr
    model_name: StrictStr
    turn_outputs: list[StrictStr] = Field(default_factory=list)
    latency_s: float = Field(default=0.0, ge=0)
    attempts: StrictInt = Field(default=1, ge=1)
    audio_duration_s: float = Field(default=0.0, ge=0)
    finished_offset_s: float = Field(default=0.0, ge=0)
    error: StrictStr | None = None

    @model_validator(mode="after")
    def _error_xor_outputs(self) -> Self:
        if (self.error is None) == (not self.turn_outputs):
            raise ValueError("prediction needs either outputs or an error, not both")
        return self


class MetricValue(BaseModel):
    """A single metric value.

    Attributes:
        metric_name: Registered metric name.
        value: Score (fraction metrics may exceed 1).
        scale: ``fraction`` or ``percent`` (0-100).
        sample_count: Samples contributing to the value.
    """

    model_config = _STRICT

    metric_name: StrictStr
    value: float = Field(ge=0)
    scale: Scale
    sample_count: StrictInt = Field(default=1, ge=0)

    @model_validator(mode="after")
    def _percent_bounded(self) -> Self:
        if self.scale == "percent" and self.value > 100:
            raise ValueError("percent metrics must lie in [0, 100]")
        return self


class EfficiencyRecord(BaseModel):
    """Inputs of the efficiency metrics."""

    model_config = _STRICT

    total_audio_s: float = Field(ge=0)
    wall_clock_s: float = Field(ge=0)
    samples_processed: StrictInt = Field(ge=0)


# =============================================================================
# Report
# =============================================================================


class SampleResult(BaseModel):
    """Scored prediction of one (sample, model) pair; one ``results.jsonl`` line."""

    model_config = _STRICT

    schema_version: StrictInt = SCHEMA_VERSION
    sample_id: StrictStr
    model_name: StrictStr
    task_name: StrictStr
    category: StrictStr
    question: StrictStr = ""
    reference: ReferenceTarget
    prediction: list[StrictStr] = Field(default_factory=list)
    metric_values: list[MetricValue] = Field(default_factory=list)
    metric_errors: dict[StrictStr, StrictStr] = Field(default_factory=dict)
    latency_s: float = Field(default=0.0, ge=0)
    audio_duration_s: float = Field(default=0.0, ge=0)
    attempts: StrictInt = Field(default=1, ge=1)
    finished_offset_s: float = Field(default=0.0, ge=0)
    error: StrictStr | None = None

    @model_validator(mode="after")
    def _error_xor_prediction(self) -> Self:
        if (self.error is None) == (not self.prediction):
            raise ValueError("result needs either a prediction or an error, not both")
        if self.error is not None and self.metric_values:
            raise ValueError("errored samples carry no metric values")
        return self


class AggregateRow(BaseModel):
    """One group of an aggregation.

    Attributes:
        key: Dimension name to group value, in AggregationSpec.dimensions order.
        metric_name: Metric of the group.
        value: Reduced score, or None when every sample errored.
        scale: Scale of the metric.
        sample_count: Non-errored samples contributing to the value.
        errors: Samples excluded because inference or scoring failed.
    """

    model_config = _STRICT

    key: dict[StrictStr, StrictStr]
    metric_name: StrictStr
    value: float | None
    scale: Scale
    sample_count: StrictInt
    errors: StrictInt


class AggregateTable(BaseModel):
    """Rows produced by one AggregationSpec."""

    model_config = _STRICT

    dimensions: list[StrictStr]
    reducer: StrictStr
    rows: list[AggregateRow]


class EfficiencySummary(BaseModel):
    """Efficiency metrics of one (task, model) pair or scenario."""

    model_config = _STRICT

    task_name: StrictStr | None = None
    model_name: StrictStr | None = None
    total_audio_s: float
    wall_clock_s: float
    samples_processed: StrictInt
    rtf: float | None
    samples_per_second: float | None


class ScenarioSummary(BaseModel):
    """Sequential and parallel whole-benchmark runtimes."""

    model_config = _STRICT

    sequential_s: float
    parallel_s: float
    sequential: EfficiencySummary
    parallel: EfficiencySummary


class RunReport(BaseModel):
    """Everything a run produced, as written to ``report.json``."""

    model_config = _STRICT

    schema_version: StrictInt = SCHEMA_VERSION
    config_fingerprint: StrictStr
    seed: StrictInt
    judge_template_version: StrictStr
    per_sample: list[SampleResult]
    aggregates: list[AggregateTable]
    efficiency: list[EfficiencySummary]
    scenario: ScenarioSummary | None


# =============================================================================
# Mock endpoint
# =============================================================================


class UniformLatency(BaseModel):
    """Latency drawn uniformly from [min_s, max_s]."""

    model_config = _CONFIG

    min_s: float = Field(ge=0)
    max_s: float = Field(ge=0)

    @model_validator(mode="after")
    def _ordered(self) -> Self:
        if self.min_s > self.max_s:
            raise ValueError("min_s must not exceed max_s")
        return self


class MockBehavior(BaseModel):
    """Scripted behavior of the mock endpoint.

    Attributes:
        latency_s: Constant latency or a uniform range.
        fail_first_n: Failures injected for each sample key before succeeding.
        fail_prob: Probability of failing any other request.
        fail_status: HTTP status used for injected failures.
        response_script: Sample key to response text; others echo the last user text.
        seed: Seed of the failure and latency generator.
    """

    model_config = _CONFIG

    latency_s: float | UniformLatency = 0.0
    fail_first_n: StrictInt = Field(default=0, ge=0)
    fail_prob: float = Field(default=0.0, ge=0, le=1)
    fail_status: StrictInt = Field(default=500, ge=400, le=599)
    response_script: dict[StrictStr, StrictStr] = Field(default_factory=dict)
    seed: StrictInt = 0


class RequestLogEntry(BaseModel):
    """One request seen by the mock."""

    model_config = _STRICT

    arrival_s: float
    messages: StrictInt
    sample_key: StrictStr
    status: StrictInt


class MockStats(BaseModel):
    """Counters exposed at ``GET /stats``."""

    model_config = _STRICT

    requests_received: StrictInt = 0
    max_concurrent_observed: StrictInt = 0
    in_flight: StrictInt = 0
    failures_injected: StrictInt = 0
    audio_bytes_received: StrictInt = 0
    per_request_log: list[RequestLogEntry] = Field(default_factory=list)


class CompletionMessage(BaseModel):
    """A message of an incoming chat-completions request."""

    model_config = ConfigDict(extra="ignore")

    role: MessageRole
    content: str | list[dict[str, Any]]

    @property
    def text(self) -> str:
        """Concatenated text parts."""
        if isinstance(self.content, str):
            return self.content
        return "".join(str(p.get("text", "")) for p in self.content if p.get("type") == "text")


class CompletionRequest(BaseModel):
    """Incoming chat-completions request, as far as the mock reads it."""

    model_config = ConfigDict(extra="ignore")

    model: str = "mock"
    messages: list[CompletionMessage] = Field(min_length=1)

    @property
    def audio_chars(self) -> int:
        """Length of all base64 audio payloads."""
        return sum(
            len(str(part.get("input_audio", {}).get("data", "")))
            for message in self.messages
            if isinstance(message.content, list)
            for part in message.content
            if part.get("type") == "input_audio"
        )


class HealthResponse(BaseModel):
    """Health check response."""

    model_config = _STRICT

    status: Literal["ok"]
    version: StrictStr
