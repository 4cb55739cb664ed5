"""Concurrent engine: one shard, one or more models.

Within an engine every (sample, model) pair runs as its own asyncio task;
the permit pools decide how many requests are actually in flight. The turns
of a multi-turn chain are strictly sequential and take one permit each.
"""

import asyncio
import time
from dataclasses import dataclass, field

from lalmeval.client.request import assemble_request, assistant_message, build_user_message
from lalmeval.config.effective import SettingsResolver, resolve_effective_settings
from lalmeval.core.logging import get_logger
from lalmeval.domain.errors import ChainFailedError, ClientError, RetriesExhaustedError
from lalmeval.domain.models import (
    ChatMessage,
    EffectiveSettings,
    EndpointSpec,
    RawPrediction,
    SampleRecord,
    Shard,
    TaskSpec,
)
from lalmeval.engine.dispatcher import Dispatcher
from lalmeval.scheduler.retry import RetryPolicy
from lalmeval.scheduler.stagger import StaggerPlan, sleep_stagger

logger = get_logger(__name__)


@dataclass
class EngineRun:
    """A shard bound to the models that evaluate it.

    Attributes:
        task: Task the shard belongs to.
        shard: Samples to evaluate.
        models: One endpoint per model; their position is the stagger index.
        started_at: Monotonic start time, set by ``run_engine``.
        finished_at: Monotonic end time, set by ``run_engine``.
    """

    task: TaskSpec
    shard: Shard
    models: list[EndpointSpec]
    started_at: float = field(default=0.0)
    finished_at: float = field(default=0.0)

    @property
    def wall_clock_s(self) -> float:
        """Engine duration."""
        return max(0.0, self.finished_at - self.started_at)


@dataclass(frozen=True)
class ChainResult:
    """Outputs of a completed chain.

    Attributes:
        outputs: One reply per user turn.
        latency_s: Request latency summed over turns.
        attempts: Attempts summed over turns.
    """

    outputs: list[str]
    latency_s: float
    attempts: int


async def run_multi_turn(
    sample: SampleRecord,
    model: EndpointSpec,
    *,
    task: TaskSpec,
    settings: EffectiveSettings,
    dispatcher: Dispatcher,
) -> ChainResult:
    """Send the user turns of a sample in order, feeding replies back.

    After each reply the assistant message joins the history, so request k
    of the chain carries 2k - 1 conversation messages. Reference assistant
    turns of the manifest are never sent. Tasks without ``multi_turn`` only
    send the first user turn.

    Raises:
        ChainFailedError: A turn could not be built or its request failed;
            later turns are not sent.
    """
    user_turns = sample.user_turns if task.multi_turn else sample.user_turns[:1]
    policy = RetryPolicy.from_settings(settings)
    history: list[ChatMessage] = []
    outputs: list[str] = []
    latency_s = 0.0
    attempts = 0

    for index, turn in enumerate(user_turns):
        try:
            message = build_user_message(turn, sample, task.prompt_template, settings.audio_chunk_s)
            request = assemble_request(
                message,
                history=history,
                settings=settings,
                model_id=model.model_id,
                system_prompt=task.system_prompt,
            )
            outcome = await dispatcher.request(
                model,
                request,
                policy,
                sample_id=sample.sample_id,
                label=f"{model.name}:{sample.sample_id} turn {index + 1}/{len(user_turns)}",
            )
        except (RetriesExhaustedError, ClientError) as e:
            error = ChainFailedError(index, len(user_turns), list(outputs), e)
            error.attempts = max(1, attempts + getattr(e, "attempts", 0))
            raise error from e

        attempts += outcome.attempts
        latency_s += outcome.value.latency_s
        outputs.append(outcome.value.text)
        history.extend([message, assistant_message(outcome.value.text)])

    return ChainResult(outputs=outputs, latency_s=latency_s, attempts=attempts)


async def _predict(
    sample: SampleRecord,
    model: EndpointSpec,
    task: TaskSpec,
    settings: EffectiveSettings,
    dispatcher: Dispatcher,
    origin: float,
) -> RawPrediction:
    try:
        chain = await run_multi_turn(sample, model, task=task, settings=settings, dispatcher=dispatcher)
    except ChainFailedError as e:
        logger.warning("%s/%s/%s failed: %s", task.task_name, model.model_name, sample.sample_id, e.message)
        return RawPrediction(
            sample_id=sample.sample_id,
            model_name=model.model_name,
            attempts=e.attempts,
            audio_duration_s=sample.audio_duration_s,
            finished_offset_s=time.monotonic() - origin,
            error=e.message,
        )
    return RawPrediction(
        sample_id=sample.sample_id,
        model_name=model.model_name,
        turn_outputs=chain.outputs,
        latency_s=chain.latency_s,
        attempts=chain.attempts,
        audio_duration_s=sample.audio_duration_s,
        finished_offset_s=time.monotonic() - origin,
    )


async def run_engine(
    run: EngineRun,
    dispatcher: Dispatcher,
    resolver: SettingsResolver = resolve_effective_settings,
    *,
    stagger_ms: float = 0.0,
    origin: float | None = None,
) -> list[RawPrediction]:
    """Evaluate every model of an engine on its shard.

    Model ``i`` waits ``i * stagger_ms`` before its first dispatch. Failed
    pairs become error-bearing predictions; the engine itself does not fail
    on request errors.

    Args:
        run: Engine to execute; its timestamps are filled in.
        dispatcher: Run dispatcher holding the shared permit pools.
        resolver: Effective settings of a (task, endpoint) pair.
        stagger_ms: Stagger step between models.
        origin: Monotonic run start that completion offsets refer to.

    Returns:
        One prediction per (sample, model), sorted by (sample_id, model_name).
    """
    if not run.shard.samples or not run.models:
        raise ValueError("an engine needs at least one sample and one model")
    run.started_at = time.monotonic()
    start = run.started_at if origin is None else origin
    logger.info(
        "Engine %s[%s]: %d samples x %s",
        run.task.task_name,
        run.shard.endpoint_name,
        len(run.shard.samples),
        [m.model_name for m in run.models],
    )

    async def evaluate_model(index: int, model: EndpointSpec) -> list[RawPrediction]:
        await sleep_stagger(StaggerPlan(base_delay_ms=stagger_ms, model_index=index))
        settings = resolver(run.task, model)
        async with asyncio.TaskGroup() as group:
            pending = [
                group.create_task(_predict(sample, model, run.task, settings, dispatcher, start))
                for sample in run.shard.samples
            ]
        return [t.result() for t in pending]

    async with asyncio.TaskGroup() as group:
        per_model = [group.create_task(evaluate_model(i, m)) for i, m in enumerate(run.models)]

    predictions = sorted(
        (p for t in per_model for p in t.result()),
        key=lambda p: (p.sample_id, p.model_name),
    )
    run.finished_at = time.monotonic()
    errored = sum(1 for p in predictions if p.error is not None)
    logger.info(
        "Engine %s[%s] finished in %.2fs: %d predictions, %d errored",
        run.task.task_name,
        run.shard.endpoint_name,
        run.wall_clock_s,
        len(predictions),
        errored,
    )
    return predictions
