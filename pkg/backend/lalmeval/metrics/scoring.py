"""Turning predictions into scored sample results.

Scoring works on SampleResult rows so that a live run and a replay from a
stored ``results.jsonl`` go through the same code. The scored hypothesis is
the output of the last user turn.
"""

import asyncio
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from lalmeval.core.logging import get_logger
from lalmeval.domain.errors import LalmevalError, MetricError, describe_error
from lalmeval.domain.models import (
    MetricValue,
    RawPrediction,
    SampleRecord,
    SampleResult,
    TaskSpec,
)
from lalmeval.engine.dispatcher import Dispatcher
from lalmeval.metrics.judge import llm_judge_score
from lalmeval.metrics.registry import MetricDef, get_metric

logger = get_logger(__name__)


@dataclass(frozen=True)
class ScoringContext:
    """What judge metrics need besides the sample.

    Attributes:
        dispatcher: Run dispatcher; required only when a task uses a judge metric.
        template_version: Judge prompt template version.
    """

    dispatcher: Dispatcher | None = None
    template_version: str = "v1"


def to_sample_result(prediction: RawPrediction, sample: SampleRecord, task: TaskSpec) -> SampleResult:
    """Join a raw prediction with its sample, unscored."""
    return SampleResult(
        sample_id=prediction.sample_id,
        model_name=prediction.model_name,
        task_name=task.task_name,
        category=task.category,
        question=sample.question,
        reference=sample.reference,
        prediction=list(prediction.turn_outputs),
        latency_s=prediction.latency_s,
        audio_duration_s=prediction.audio_duration_s,
        attempts=prediction.attempts,
        finished_offset_s=prediction.finished_offset_s,
        error=prediction.error,
    )


async def _metric_value(metric: MetricDef, result: SampleResult, task: TaskSpec, ctx: ScoringContext) -> float:
    metric.check_reference(result.reference.kind)
    hypothesis = result.prediction[-1]
    if metric.scorer is not None:
        return metric.scorer(result.reference, hypothesis)

    if task.judge is None or ctx.dispatcher is None:
        raise MetricError(f"Metric '{metric.name}' needs a judge endpoint")
    mode = task.judge.judge_mode if metric.judge_mode == "task" else metric.judge_mode
    assert mode == "binary" or mode == "detailed"
    return await llm_judge_score(
        result.question,
        result.reference.value,
        hypothesis,
        task.judge,
        ctx.dispatcher,
        mode=mode,
        template_version=ctx.template_version,
        sample_id=result.sample_id,
        pool_key=task.task_name,
    )


async def score_result(result: SampleResult, task: TaskSpec, ctx: ScoringContext) -> SampleResult:
    """Compute every metric of ``task`` for one result.

    Errored results stay unscored. A metric that fails on this sample is
    recorded in ``metric_errors`` and the remaining metrics still run.
    """
    if result.error is not None:
        return result.model_copy(update={"metric_values": [], "metric_errors": {}})

    values: list[MetricValue] = []
    errors: dict[str, str] = {}
    for name in task.metric_names:
        metric = get_metric(name)
        try:
            value = await _metric_value(metric, result, task, ctx)
        except LalmevalError as e:
            errors[name] = describe_error(e)
            logger.warning("%s/%s/%s: %s not scored: %s", task.task_name, result.model_name, result.sample_id, name, e)
            continue
        values.append(MetricValue(metric_name=name, value=value, scale=metric.scale))
    return result.model_copy(update={"metric_values": values, "metric_errors": errors})


async def score_results(
    results: Sequence[SampleResult], tasks: Mapping[str, TaskSpec], ctx: ScoringContext
) -> list[SampleResult]:
    """Score results of any tasks concurrently, keeping input order.

    Judge requests are bounded by the dispatcher's pools, not here.
    """
    return list(await asyncio.gather(*(score_result(r, tasks[r.task_name], ctx) for r in results)))
