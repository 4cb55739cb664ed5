"""LLM-as-judge scoring.

The judge endpoint receives a fixed, versioned prompt template and answers
with a verdict: a final ``0``/``1`` in binary mode, or a final
``Rating: k`` line (k in 0..5) in detailed mode. Verdicts map to the 0-100
percent scale.
"""

import re
from functools import lru_cache
from importlib import resources

from lalmeval.client.request import assemble_request
from lalmeval.domain.errors import JudgeParseError
from lalmeval.domain.models import (
    ChatMessage,
    ContentPart,
    EffectiveSettings,
    EndpointSpec,
    JudgeMode,
    JudgeSpec,
)
from lalmeval.engine.dispatcher import Dispatcher
from lalmeval.scheduler.retry import RetryPolicy

JUDGE_MAX_TOKENS = 512

_BINARY_VERDICT = re.compile(r"(?<![\w.])([01])[\s.*)\]]*\Z")
_RATING = re.compile(r"rating\s*[:=]\s*\**\s*(\d+)\b", re.IGNORECASE)


@lru_cache
def load_judge_template(mode: JudgeMode, version: str) -> str:
    """Read a judge prompt template shipped with the package.

    Raises:
        FileNotFoundError: No template exists for this mode and version.
    """
    path = resources.files("lalmeval.metrics") / "templates" / f"judge_{mode}_{version}.txt"
    return path.read_text(encoding="utf-8")


def render_judge_prompt(mode: JudgeMode, version: str, question: str, reference: str, hypothesis: str) -> str:
    """Fill the judge template of ``mode``."""
    return load_judge_template(mode, version).format(question=question, reference=reference, hypothesis=hypothesis)


def parse_verdict(mode: JudgeMode, reply: str) -> float:
    """Map a judge reply to a 0-100 score.

    Raises:
        JudgeParseError: The reply carries no verdict in the mode's format.
    """
    if mode == "binary":
        match = _BINARY_VERDICT.search(reply.strip())
        if match is None:
            raise JudgeParseError(mode, reply)
        return 100.0 * int(match.group(1))

    ratings = _RATING.findall(reply)
    if not ratings or not 0 <= int(ratings[-1]) <= 5:
        raise JudgeParseError(mode, reply)
    return 20.0 * int(ratings[-1])


def judge_settings(endpoint: EndpointSpec) -> EffectiveSettings:
    """Request settings of a judge endpoint (greedy decoding unless overridden)."""
    return EffectiveSettings(
        temperature=endpoint.temperature if endpoint.temperature is not None else 0.0,
        max_tokens=endpoint.max_tokens if endpoint.max_tokens is not None else JUDGE_MAX_TOKENS,
        timeout_s=endpoint.timeout_s,
        retry_limit=endpoint.retry_limit,
        retry_wait_s=endpoint.retry_wait_s,
    )


async def llm_judge_score(
    question: str,
    reference: str,
    hypothesis: str,
    judge: JudgeSpec,
    dispatcher: Dispatcher,
    *,
    mode: JudgeMode | None = None,
    template_version: str = "v1",
    sample_id: str | None = None,
    pool_key: str | None = None,
) -> float:
    """Ask the judge endpoint to grade a hypothesis.

    Each attempt holds a global permit and a permit of the judge pool keyed
    by ``pool_key`` (sized by ``judge_concurrency``).

    Args:
        question: User-turn text shown to the model.
        reference: Expected answer.
        hypothesis: Model answer.
        judge: Judge configuration.
        dispatcher: Run dispatcher.
        mode: Verdict format; defaults to ``judge.judge_mode``.
        template_version: Judge template version.
        sample_id: Forwarded for request tracing.
        pool_key: Judge pool owner, normally the task name; defaults to the
            judge endpoint name.

    Returns:
        Score on the 0-100 scale.

    Raises:
        JudgeParseError: Unparseable verdict.
        RetriesExhaustedError: The judge request failed.
    """
    mode = mode or judge.judge_mode
    prompt = render_judge_prompt(mode, template_version, question, reference, hypothesis)
    settings = judge_settings(judge.endpoint)
    request = assemble_request(
        ChatMessage(role="user", parts=[ContentPart.of_text(prompt)]),
        history=[],
        settings=settings,
        model_id=judge.endpoint.model_id,
    )
    outcome = await dispatcher.request(
        judge.endpoint,
        request,
        RetryPolicy.from_settings(settings),
        sample_id=sample_id,
        label=f"judge {mode}:{sample_id}",
        endpoint_pool=dispatcher.judge_pool(pool_key or judge.endpoint.name, judge),
    )
    return parse_verdict(mode, outcome.value.text)
