"""Typed exception hierarchy for the evaluation harness."""


class LalmevalError(Exception):
    """Base exception for all lalmeval errors."""

    def __init__(self, message: str) -> None:
        self.message = message
        super().__init__(message)


# =============================================================================
# Configuration
# =============================================================================


class ConfigError(LalmevalError):
    """Run configuration could not be loaded."""


class ConfigSyntaxError(ConfigError):
    """The document is not well-formed YAML."""


class ConfigSchemaError(ConfigError):
    """Missing, extra, duplicated or ill-typed field."""

    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"{path}: {message}")


class ConfigInvariantError(ConfigError):
    """Well-typed value that violates a configuration invariant."""

    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"{path}: {message}")


class ConfigIoError(ConfigError):
    """Configuration file could not be read."""

    def __init__(self, path: str, reason: str) -> None:
        self.path = path
        super().__init__(f"Cannot read config '{path}': {reason}")


# =============================================================================
# Dataset
# =============================================================================


class DatasetError(LalmevalError):
    """Dataset ingestion error."""


class ManifestIoError(DatasetError):
    """Manifest file could not be read."""

    def __init__(self, path: str, reason: str) -> None:
        self.path = path
        super().__init__(f"Cannot read manifest '{path}': {reason}")


class ManifestError(DatasetError):
    """Malformed manifest line."""

    def __init__(self, line: int, message: str) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}")


class DuplicateIdError(DatasetError):
    """Two manifest records share a sample ID."""

    def __init__(self, sample_id: str, line: int) -> None:
        self.sample_id = sample_id
        self.line = line
        super().__init__(f"line {line}: duplicate sample_id '{sample_id}'")


# =============================================================================
# Scheduler
# =============================================================================


class SchedulerError(LalmevalError):
    """Permit pool or retry execution error."""


class PoolClosedError(SchedulerError):
    """The permit pool was shut down while waiting."""

    def __init__(self) -> None:
        super().__init__("Permit pool is closed")


class PermitReleasedError(SchedulerError):
    """A permit was released more than once."""

    def __init__(self) -> None:
        super().__init__("Permit already released")


class RetriesExhaustedError(SchedulerError):
    """Every attempt of a request failed."""

    def __init__(self, last_error: BaseException, attempts: int) -> None:
        self.last_error = last_error
        self.attempts = attempts
        super().__init__(f"Failed after {attempts} attempt(s): {describe_error(last_error)}")


# =============================================================================
# Client
# =============================================================================


class ClientError(LalmevalError):
    """Request construction or transport error.

    Attributes:
        retryable: Whether a fresh attempt may succeed.
    """

    retryable: bool = False


class AudioIoError(ClientError):
    """Audio file could not be read."""

    def __init__(self, path: str, reason: str) -> None:
        self.path = path
        super().__init__(f"Cannot read audio '{path}': {reason}")


class AudioFormatError(ClientError):
    """Audio file is not 16 kHz, 16-bit, mono PCM WAV."""

    def __init__(self, path: str, reason: str) -> None:
        self.path = path
        super().__init__(f"Unsupported audio '{path}': {reason}")


class TemplateError(ClientError):
    """Prompt template placeholder could not be resolved."""

    def __init__(self, placeholder: str, sample_id: str) -> None:
        self.placeholder = placeholder
        self.sample_id = sample_id
        super().__init__(f"Unresolved placeholder '{{{placeholder}}}' for sample '{sample_id}'")


class RequestBuildError(ClientError):
    """Conversation history is not a valid alternation of roles."""


class TransportError(ClientError):
    """Failure while talking to an endpoint."""

    retryable = True


class RequestTimeoutError(TransportError):
    """Request exceeded its timeout."""

    def __init__(self, timeout_s: float) -> None:
        self.timeout_s = timeout_s
        super().__init__(f"Request timed out after {timeout_s:g}s")


class EndpointConnectionError(TransportError):
    """Endpoint could not be reached."""


class HttpStatusError(TransportError):
    """Endpoint answered with a non-2xx status."""

    def __init__(self, code: int, retryable: bool, detail: str = "") -> None:
        self.code = code
        self.retryable = retryable
        suffix = f": {detail}" if detail else ""
        super().__init__(f"HTTP {code}{suffix}")


class ResponseDecodeError(TransportError):
    """Response body is not a chat-completions document."""

    retryable = False


# =============================================================================
# Engine
# =============================================================================


class EngineError(LalmevalError):
    """Engine orchestration error."""


class ChainFailedError(EngineError):
    """A multi-turn chain stopped at a turn whose request failed."""

    def __init__(self, turn_index: int, total_turns: int, outputs: list[str], cause: BaseException) -> None:
        self.turn_index = turn_index
        self.total_turns = total_turns
        self.outputs = outputs
        self.cause = cause
        self.attempts = getattr(cause, "attempts", 1)
        super().__init__(f"turn {turn_index + 1}/{total_turns}: {describe_error(cause)}")


# =============================================================================
# Metrics
# =============================================================================


class MetricError(LalmevalError):
    """Scoring error recorded against a single sample."""


class EmptyReferenceError(MetricError):
    """Reference has no words."""

    def __init__(self) -> None:
        super().__init__("Reference transcript is empty")


class NoAlignedPairsError(MetricError):
    """Hypothesis shares no aligned words with the reference."""

    def __init__(self) -> None:
        super().__init__("No aligned word pairs between reference and hypothesis")


class TranscriptFormatError(MetricError):
    """Speaker-tagged transcript violates the tag grammar."""


class JudgeParseError(MetricError):
    """Judge reply carries no verdict in the expected format."""

    def __init__(self, mode: str, reply: str) -> None:
        self.mode = mode
        self.reply = reply
        preview = reply if len(reply) <= 80 else reply[:77] + "..."
        super().__init__(f"Unparseable {mode} judge verdict: {preview!r}")


class MetricInputError(MetricError):
    """Reference kind cannot be scored by the metric."""

    def __init__(self, metric: str, kind: str) -> None:
        self.metric = metric
        self.kind = kind
        super().__init__(f"Metric '{metric}' cannot score reference kind '{kind}'")


class ZeroAudioError(MetricError):
    """RTF requested for a run without audio."""

    def __init__(self) -> None:
        super().__init__("Total audio duration is zero")


class ZeroWallClockError(MetricError):
    """Throughput requested for a run with zero wall clock."""

    def __init__(self) -> None:
        super().__init__("Wall clock is zero")


class EmptyRuntimeListError(MetricError):
    """Runtime scenarios requested without any dataset runtime."""

    def __init__(self) -> None:
        super().__init__("At least one dataset runtime is required")


# =============================================================================
# Report
# =============================================================================


class ReportError(LalmevalError):
    """Report generation error."""


class ReportWriteError(ReportError):
    """Output file could not be written."""

    def __init__(self, path: str, reason: str) -> None:
        self.path = path
        super().__init__(f"Cannot write '{path}': {reason}")


class PredictionsSchemaError(ReportError):
    """Stored predictions cannot be replayed."""


# =============================================================================
# Mock endpoint
# =============================================================================


class MockError(LalmevalError):
    """Mock endpoint server error."""


class BindError(MockError):
    """Mock server could not bind its port."""

    def __init__(self, host: str, port: int, reason: str) -> None:
        self.host = host
        self.port = port
        super().__init__(f"Cannot bind {host}:{port}: {reason}")


class ScriptedCheckError(MockError, AssertionError):
    """Recorded request log does not match the expected message counts."""


def describe_error(error: BaseException) -> str:
    """Render an exception as a one-line description.

    Args:
        error: Any exception.

    Returns:
        The domain message when available, else ``TypeName: text``.
    """
    if isinstance(error, LalmevalError):
        return error.message
    text = str(error)
    return f"{type(error).__name__}: {text}" if text else type(error).__name__
