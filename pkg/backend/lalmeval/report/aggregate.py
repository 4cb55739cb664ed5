"""Multi-dimensional aggregation of per-sample scores.

The base unit holds the non-errored sample values of one (task, model,
metric) triple. Requested dimensions group base units, the metric always
being part of the grouping. The ``mean`` reducer averages every sample value
of a group; ``weighted_mean_by_sample_count`` rolls the base-unit means up,
weighted by their sample counts.
"""

import math
from collections import defaultdict
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from lalmeval.domain.models import AggregateRow, AggregateTable, AggregationSpec, SampleResult
from lalmeval.metrics.registry import get_metric

DEFAULT_AGGREGATION = AggregationSpec(dimensions=["task", "model", "metric"], reducer="mean")


@dataclass
class _Unit:
    category: str
    values: list[float] = field(default_factory=list)
    errors: int = 0

    @property
    def score(self) -> float | None:
        return math.fsum(self.values) / len(self.values) if self.values else None


def metrics_by_task(results: Sequence[SampleResult]) -> dict[str, list[str]]:
    """Metric names seen per task, in order of first appearance."""
    seen: dict[str, dict[str, None]] = defaultdict(dict)
    for result in results:
        for value in result.metric_values:
            seen[result.task_name][value.metric_name] = None
        for name in result.metric_errors:
            seen[result.task_name][name] = None
    return {task: list(names) for task, names in seen.items()}


def base_units(
    results: Sequence[SampleResult], task_metrics: Mapping[str, Sequence[str]]
) -> dict[tuple[str, str, str], _Unit]:
    """Collect sample values per (task, model, metric)."""
    units: dict[tuple[str, str, str], _Unit] = {}
    for result in results:
        values = {v.metric_name: v.value for v in result.metric_values}
        for metric in task_metrics.get(result.task_name, ()):
            unit = units.setdefault((result.task_name, result.model_name, metric), _Unit(result.category))
            if result.error is None and metric in values:
                unit.values.append(values[metric])
            else:
                unit.errors += 1
    return units


def aggregate(
    results: Sequence[SampleResult],
    spec: AggregationSpec,
    task_metrics: Mapping[str, Sequence[str]] | None = None,
) -> AggregateTable:
    """Aggregate sample results along the dimensions of ``spec``.

    Errored samples, and samples whose metric failed, are left out of the
    values and counted in the row's ``errors``. A group without any value
    reports ``value=None``. The output does not depend on input order.

    Args:
        results: Scored sample results.
        spec: Dimensions and reducer.
        task_metrics: Metrics assigned to each task; inferred from the
            results when omitted.

    Returns:
        One row per group, sorted by key.
    """
    if task_metrics is None:
        task_metrics = metrics_by_task(results)

    groups: dict[tuple[tuple[str, ...], str], list[_Unit]] = defaultdict(list)
    for (task, model, metric), unit in base_units(results, task_metrics).items():
        coordinates = {"task": task, "model": model, "metric": metric, "category": unit.category}
        key = tuple(coordinates[d] for d in spec.dimensions)
        groups[(key, metric)].append(unit)

    rows: list[AggregateRow] = []
    for (key, metric), units in sorted(groups.items()):
        scored = [u for u in units if u.score is not None]
        count = sum(len(u.values) for u in units)
        value: float | None = None
        if scored:
            if spec.reducer == "mean":
                value = math.fsum(v for u in scored for v in u.values) / count
            else:
                value = math.fsum((u.score or 0.0) * len(u.values) for u in scored) / count
        rows.append(
            AggregateRow(
                key=dict(zip(spec.dimensions, key, strict=True)),
                metric_name=metric,
                value=value,
                scale=get_metric(metric).scale,
                sample_count=count,
                errors=sum(u.errors for u in units),
            )
        )
    return AggregateTable(dimensions=list(spec.dimensions), reducer=spec.reducer, rows=rows)
