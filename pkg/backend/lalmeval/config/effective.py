"""Resolution of per-request settings.

Precedence is endpoint > task > built-in default, for every setting that
exists at more than one level. Timeout, retry and chunking limits are
endpoint-only.
"""

from collections.abc import Callable

from lalmeval.domain.models import EffectiveSettings, EndpointSpec, TaskSpec

DEFAULT_TEMPERATURE = 0.0
DEFAULT_MAX_TOKENS = 1024

SettingsResolver = Callable[[TaskSpec, EndpointSpec], EffectiveSettings]


def resolve_effective_settings(task: TaskSpec, endpoint: EndpointSpec) -> EffectiveSettings:
    """Resolve the settings used for requests of ``task`` sent to ``endpoint``.

    Args:
        task: Validated task.
        endpoint: Validated endpoint.

    Returns:
        Effective settings; total for every valid input.
    """
    temperature = endpoint.temperature
    if temperature is None:
        temperature = task.temperature if task.temperature is not None else DEFAULT_TEMPERATURE

    max_tokens = endpoint.max_tokens
    if max_tokens is None:
        max_tokens = task.max_tokens if task.max_tokens is not None else DEFAULT_MAX_TOKENS

    return EffectiveSettings(
        temperature=temperature,
        max_tokens=max_tokens,
        timeout_s=endpoint.timeout_s,
        retry_limit=endpoint.retry_limit,
        retry_wait_s=endpoint.retry_wait_s,
        audio_chunk_s=endpoint.audio_chunk_s,
    )
