"""Sample filtering by audio duration, metadata and sample budget."""

import random

from lalmeval.domain.models import FilterSpec, SampleRecord


def _matches(sample: SampleRecord, spec: FilterSpec) -> bool:
    if spec.min_audio_s is not None and sample.audio_duration_s < spec.min_audio_s:
        return False
    if spec.max_audio_s is not None and sample.audio_duration_s > spec.max_audio_s:
        return False
    if spec.metadata_equals:
        return all(sample.metadata.get(key) == value for key, value in spec.metadata_equals.items())
    return True


def apply_filters(samples: list[SampleRecord], spec: FilterSpec, seed: int) -> list[SampleRecord]:
    """Keep the samples selected by a filter.

    The sample budget is drawn from a seed-keyed shuffle to avoid favoring the
    head of the manifest; kept samples stay in manifest order, which makes the
    filter idempotent.

    Args:
        samples: Validated samples in manifest order.
        spec: Filter to apply.
        seed: Run seed keying the shuffle.

    Returns:
        Kept samples in their original relative order.
    """
    kept = [sample for sample in samples if _matches(sample, spec)]
    if spec.max_samples is None or len(kept) <= spec.max_samples:
        return kept

    order = list(range(len(kept)))
    random.Random(seed).shuffle(order)
    chosen = sorted(order[: spec.max_samples])
    return [kept[i] for i in chosen]
