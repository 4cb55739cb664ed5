"""Throughput metrics of a run: real-time factor and samples per second."""

from collections.abc import Sequence
from dataclasses import dataclass

from lalmeval.domain.errors import EmptyRuntimeListError, ZeroAudioError, ZeroWallClockError
from lalmeval.domain.models import EfficiencyRecord, EfficiencySummary


def rtf(record: EfficiencyRecord) -> float:
    """Real-time factor: wall clock per second of processed audio. Lower is better.

    Raises:
        ZeroAudioError: No audio was processed.
    """
    if record.total_audio_s <= 0:
        raise ZeroAudioError()
    return record.wall_clock_s / record.total_audio_s


def samples_per_second(record: EfficiencyRecord) -> float:
    """Processed samples per wall-clock second.

    Raises:
        ZeroWallClockError: The wall clock is zero.
    """
    if record.wall_clock_s <= 0:
        raise ZeroWallClockError()
    return record.samples_processed / record.wall_clock_s


@dataclass(frozen=True)
class ScenarioRuntimes:
    """Whole-benchmark runtime if datasets ran one after another or all at once."""

    sequential: float
    parallel: float


def scenario_runtimes(per_dataset_wall: Sequence[float]) -> ScenarioRuntimes:
    """Sequential (sum) and parallel (max) runtimes of a set of dataset runs.

    Raises:
        EmptyRuntimeListError: No runtimes were given.
    """
    if not per_dataset_wall:
        raise EmptyRuntimeListError()
    return ScenarioRuntimes(sequential=sum(per_dataset_wall), parallel=max(per_dataset_wall))


def summarize(
    record: EfficiencyRecord, task_name: str | None = None, model_name: str | None = None
) -> EfficiencySummary:
    """Efficiency summary with undefined metrics left as None."""
    return EfficiencySummary(
        task_name=task_name,
        model_name=model_name,
        total_audio_s=record.total_audio_s,
        wall_clock_s=record.wall_clock_s,
        samples_processed=record.samples_processed,
        rtf=rtf(record) if record.total_audio_s > 0 else None,
        samples_per_second=samples_per_second(record) if record.wall_clock_s > 0 else None,
    )
