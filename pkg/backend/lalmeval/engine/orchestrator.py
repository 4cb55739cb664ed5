"""Whole-run orchestration.

A run loads and filters every task's dataset, shards it across the
replicas of each model, runs all engines of all tasks concurrently under
one global permit pool, scores the predictions and assembles the report.
"""

import asyncio
import time
from collections.abc import Collection, Sequence
from dataclasses import dataclass
from pathlib import Path

from lalmeval.core.config import get_settings
from lalmeval.core.logging import get_logger
from lalmeval.dataset.filters import apply_filters
from lalmeval.dataset.manifest import load_manifest
from lalmeval.dataset.sharding import shard_dataset
from lalmeval.domain.errors import PredictionsSchemaError
from lalmeval.domain.models import (
    EndpointSpec,
    RawPrediction,
    RunConfig,
    RunReport,
    SampleRecord,
    SampleResult,
    TaskSpec,
)
from lalmeval.engine.dispatcher import Dispatcher
from lalmeval.engine.runner import EngineRun, run_engine
from lalmeval.metrics.registry import get_metric
from lalmeval.metrics.scoring import ScoringContext, score_results, to_sample_result
from lalmeval.report.builder import build_report
from lalmeval.scheduler.permits import PermitPool

logger = get_logger(__name__)


@dataclass(frozen=True)
class TaskPlan:
    """A task with its filtered samples and engines."""

    task: TaskSpec
    samples: list[SampleRecord]
    engines: list[EngineRun]


def select_tasks(config: RunConfig, categories: Collection[str] | None = None) -> list[TaskSpec]:
    """Tasks of the run, restricted to ``categories`` when given."""
    if not categories:
        return list(config.tasks)
    return [t for t in config.tasks if t.category in categories]


def model_groups(endpoints: Sequence[EndpointSpec]) -> dict[str, list[EndpointSpec]]:
    """Endpoints grouped by model name, in configuration order."""
    groups: dict[str, list[EndpointSpec]] = {}
    for endpoint in endpoints:
        groups.setdefault(endpoint.model_name, []).append(endpoint)
    return groups


def load_task_samples(task: TaskSpec, config: RunConfig, base_dir: Path) -> list[SampleRecord]:
    """Load a task's manifest and apply its filter.

    Raises:
        ManifestIoError: Unreadable manifest.
        ManifestError: Malformed manifest line.
        DuplicateIdError: Repeated sample ID.
    """
    dataset = Path(task.dataset_path)
    samples = load_manifest(dataset if dataset.is_absolute() else base_dir / dataset)
    spec = config.filters.get(task.task_name)
    return apply_filters(samples, spec, config.seed) if spec is not None else samples


def plan_engines(task: TaskSpec, samples: list[SampleRecord], endpoints: Sequence[EndpointSpec]) -> list[EngineRun]:
    """Bind shards to models.

    Each model's samples are sharded across its replicas. Models whose
    shards coincide (every single-endpoint model gets the whole dataset)
    share one multi-model engine.
    """
    engines: dict[tuple[str, ...], EngineRun] = {}
    for replicas in model_groups(endpoints).values():
        for shard, endpoint in zip(shard_dataset(samples, replicas), replicas, strict=True):
            if not shard.samples:
                continue
            key = tuple(s.sample_id for s in shard.samples)
            if key in engines:
                engines[key].models.append(endpoint)
            else:
                engines[key] = EngineRun(task=task, shard=shard, models=[endpoint])
    return list(engines.values())


def plan_run(
    config: RunConfig, base_dir: Path, categories: Collection[str] | None = None
) -> list[TaskPlan]:
    """Load every selected task and plan its engines."""
    plans = []
    for task in select_tasks(config, categories):
        samples = load_task_samples(task, config, base_dir)
        if not samples:
            logger.warning("Task %s has no samples after filtering", task.task_name)
        plans.append(TaskPlan(task=task, samples=samples, engines=plan_engines(task, samples, config.endpoints)))
    return plans


def new_dispatcher(config: RunConfig) -> Dispatcher:
    """Dispatcher with the run's global pool and every endpoint registered."""
    dispatcher = Dispatcher(PermitPool(config.global_permit_limit))
    dispatcher.register_all(config.endpoints)
    for task in config.tasks:
        if task.judge is not None:
            dispatcher.judge_pool(task.task_name, task.judge)
    return dispatcher


async def run_evaluation(
    config: RunConfig,
    base_dir: str | Path = ".",
    categories: Collection[str] | None = None,
    dispatcher: Dispatcher | None = None,
) -> RunReport:
    """Run a complete evaluation.

    Args:
        config: Validated run configuration.
        base_dir: Directory relative dataset paths resolve against.
        categories: Only run tasks of these categories.
        dispatcher: Dispatcher to use; a fresh one is created and closed otherwise.

    Returns:
        The scored run report.

    Raises:
        DatasetError: A manifest could not be loaded.
    """
    plans = plan_run(config, Path(base_dir), categories)
    own_dispatcher = dispatcher is None
    dispatcher = dispatcher or new_dispatcher(config)
    try:
        origin = time.monotonic()
        async with asyncio.TaskGroup() as group:
            pending = [
                (plan, group.create_task(run_engine(engine, dispatcher, stagger_ms=config.stagger_ms, origin=origin)))
                for plan in plans
                for engine in plan.engines
            ]
        logger.info("Inference finished in %.2fs", time.monotonic() - origin)

        results: list[SampleResult] = []
        for plan, engine_task in pending:
            by_id = {s.sample_id: s for s in plan.samples}
            predictions: list[RawPrediction] = engine_task.result()
            results.extend(to_sample_result(p, by_id[p.sample_id], plan.task) for p in predictions)

        template_version = get_settings().judge_template_version
        ctx = ScoringContext(dispatcher=dispatcher, template_version=template_version)
        scored = await score_results(results, {t.task_name: t for t in config.tasks}, ctx)
        return build_report(config, scored, template_version)
    finally:
        if own_dispatcher:
            await dispatcher.aclose()


def check_replayable(results: Sequence[SampleResult], config: RunConfig) -> None:
    """Check stored results against the tasks that will rescore them.

    Raises:
        PredictionsSchemaError: Unknown task, or a reference kind a task
            metric cannot score.
    """
    tasks = {t.task_name: t for t in config.tasks}
    for result in results:
        task = tasks.get(result.task_name)
        if task is None:
            raise PredictionsSchemaError(f"Sample '{result.sample_id}': unknown task '{result.task_name}'")
        for name in task.metric_names:
            if result.reference.kind not in get_metric(name).reference_kinds:
                raise PredictionsSchemaError(
                    f"Sample '{result.sample_id}': metric '{name}' needs a reference of kind "
                    f"{sorted(get_metric(name).reference_kinds)}, got '{result.reference.kind}'"
                )


async def replay_scores(
    config: RunConfig, results: Sequence[SampleResult], dispatcher: Dispatcher | None = None
) -> RunReport:
    """Rescore stored results without inference.

    Stored metric values are discarded and recomputed; timing fields are
    kept, so efficiency figures are reproduced as well.

    Raises:
        PredictionsSchemaError: Results cannot be scored by the configured tasks.
    """
    check_replayable(results, config)
    needs_judge = any(get_metric(m).needs_judge for t in config.tasks for m in t.metric_names)
    own_dispatcher = dispatcher is None and needs_judge
    if own_dispatcher:
        dispatcher = new_dispatcher(config)
    try:
        template_version = get_settings().judge_template_version
        unscored = [r.model_copy(update={"metric_values": [], "metric_errors": {}}) for r in results]
        ctx = ScoringContext(dispatcher=dispatcher, template_version=template_version)
        scored = await score_results(unscored, {t.task_name: t for t in config.tasks}, ctx)
        return build_report(config, scored, template_version)
    finally:
        if own_dispatcher and dispatcher is not None:
            await dispatcher.aclose()


def failed_tasks(report: RunReport, task_names: Sequence[str]) -> list[str]:
    """Tasks without a single successful prediction."""
    succeeded = {r.task_name for r in report.per_sample if r.error is None}
    return [name for name in task_names if name not in succeeded]
