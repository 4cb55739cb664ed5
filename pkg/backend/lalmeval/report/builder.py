"""Assembly of the run report from scored sample results."""

from collections import defaultdict
from collections.abc import Sequence

from lalmeval.config.loader import config_fingerprint
from lalmeval.domain.models import (
    EfficiencyRecord,
    EfficiencySummary,
    RunConfig,
    RunReport,
    SampleResult,
    ScenarioSummary,
)
from lalmeval.metrics.efficiency import scenario_runtimes, summarize
from lalmeval.report.aggregate import DEFAULT_AGGREGATION, aggregate


def result_order(result: SampleResult) -> tuple[str, str, str]:
    """Canonical order of sample results in every output."""
    return (result.task_name, result.sample_id, result.model_name)


def _record(results: Sequence[SampleResult], wall_clock_s: float) -> EfficiencyRecord:
    succeeded = [r for r in results if r.error is None]
    return EfficiencyRecord(
        total_audio_s=sum(r.audio_duration_s for r in succeeded),
        wall_clock_s=wall_clock_s,
        samples_processed=len(succeeded),
    )


def task_walls(results: Sequence[SampleResult]) -> dict[str, float]:
    """Wall clock per task: its latest completion offset."""
    walls: dict[str, float] = {}
    for result in results:
        walls[result.task_name] = max(walls.get(result.task_name, 0.0), result.finished_offset_s)
    return dict(sorted(walls.items()))


def efficiency_summaries(results: Sequence[SampleResult]) -> list[EfficiencySummary]:
    """RTF and throughput per (task, model).

    The wall clock of a pair is the completion offset of its last
    prediction; audio and sample counts cover successful predictions only.
    """
    by_pair: dict[tuple[str, str], list[SampleResult]] = defaultdict(list)
    for result in results:
        by_pair[(result.task_name, result.model_name)].append(result)
    summaries = []
    for (task, model), pair in sorted(by_pair.items()):
        wall = max(r.finished_offset_s for r in pair)
        summaries.append(summarize(_record(pair, wall), task_name=task, model_name=model))
    return summaries


def scenario_summary(results: Sequence[SampleResult]) -> ScenarioSummary | None:
    """Sequential and parallel runtimes over the run's datasets.

    Returns:
        None when the run evaluated no dataset.
    """
    walls = task_walls(results)
    if not walls:
        return None
    runtimes = scenario_runtimes(list(walls.values()))
    return ScenarioSummary(
        sequential_s=runtimes.sequential,
        parallel_s=runtimes.parallel,
        sequential=summarize(_record(results, runtimes.sequential)),
        parallel=summarize(_record(results, runtimes.parallel)),
    )


def build_report(config: RunConfig, results: Sequence[SampleResult], judge_template_version: str) -> RunReport:
    """Aggregate scored results into a report.

    Args:
        config: Run configuration (aggregations, seed, fingerprint).
        results: Scored results of every task, in any order.
        judge_template_version: Recorded judge template version.
    """
    per_sample = sorted(results, key=result_order)
    task_metrics = {t.task_name: list(t.metric_names) for t in config.tasks}
    specs = config.aggregations or [DEFAULT_AGGREGATION]
    return RunReport(
        config_fingerprint=config_fingerprint(config),
        seed=config.seed,
        judge_template_version=judge_template_version,
        per_sample=per_sample,
        aggregates=[aggregate(per_sample, spec, task_metrics) for spec in specs],
        efficiency=efficiency_summaries(per_sample),
        scenario=scenario_summary(per_sample),
    )
