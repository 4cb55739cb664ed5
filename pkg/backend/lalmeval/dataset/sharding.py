"""Capacity-proportional dataset sharding.

Shard sizes follow largest-remainder apportionment: every endpoint first gets
the floor of its exact share ``N * c_i / sum(c)``, and the seats left over go
to the largest fractional remainders (ties to the earlier endpoint). Each size
therefore differs from the exact share by less than one.
"""

from collections.abc import Sequence

from lalmeval.domain.models import EndpointSpec, SampleRecord, Shard


def apportion(total: int, capacities: Sequence[int]) -> list[int]:
    """Split ``total`` items proportionally to ``capacities``.

    Args:
        total: Number of items.
        capacities: Positive weights.

    Returns:
        Non-negative sizes summing to ``total``.

    Raises:
        ValueError: If capacities are empty or not positive.
    """
    if not capacities or any(c < 1 for c in capacities):
        raise ValueError("capacities must be a non-empty list of positive integers")

    weight = sum(capacities)
    # Integer arithmetic keeps the remainders exact.
    sizes = [total * c // weight for c in capacities]
    remainders = [total * c % weight for c in capacities]
    leftover = total - sum(sizes)
    by_remainder = sorted(range(len(capacities)), key=lambda i: (-remainders[i], i))
    for i in by_remainder[:leftover]:
        sizes[i] += 1
    return sizes


def shard_dataset(samples: list[SampleRecord], endpoints: Sequence[EndpointSpec]) -> list[Shard]:
    """Partition samples into contiguous shards, one per endpoint.

    Args:
        samples: Filtered samples in evaluation order.
        endpoints: Endpoints receiving the shards, capacities >= 1.

    Returns:
        One shard per endpoint, in endpoint order; disjoint and covering.
    """
    sizes = apportion(len(samples), [e.capacity for e in endpoints])
    shards: list[Shard] = []
    start = 0
    for endpoint, size in zip(endpoints, sizes, strict=True):
        shards.append(Shard(endpoint_name=endpoint.name, samples=samples[start : start + size]))
        start += size
    return shards
