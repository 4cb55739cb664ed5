"""Assertions over the request log of a mock endpoint."""

from collections.abc import Mapping, Sequence

from lalmeval.domain.errors import ScriptedCheckError
from lalmeval.domain.models import MockStats
from lalmeval.mocklalm.server import MockServerHandle


def _compare(label: str, observed: list[int], expected: Sequence[int]) -> None:
    for index, (got, want) in enumerate(zip(observed, expected, strict=False)):
        if got != want:
            raise ScriptedCheckError(f"{label}: request {index + 1} carried {got} messages, expected {want}")
    if len(observed) != len(expected):
        raise ScriptedCheckError(f"{label}: {len(observed)} requests logged, expected {len(expected)}")


def scripted_turn_check(
    source: MockServerHandle | MockStats,
    expectations: Sequence[int] | Mapping[str, Sequence[int]],
) -> None:
    """Check the message counts of logged requests.

    Args:
        source: Running server, or counters already fetched from it.
        expectations: Message counts of all requests in arrival order, or a
            map from sample key to the counts of that sample's requests,
            which checks interleaved chains independently.

    Raises:
        ScriptedCheckError: The log differs; the message names the first mismatch.
    """
    stats = source.stats() if isinstance(source, MockServerHandle) else source
    log = stats.per_request_log
    if isinstance(expectations, Mapping):
        for key, expected in expectations.items():
            _compare(f"sample '{key}'", [e.messages for e in log if e.sample_key == key], expected)
    else:
        _compare("log", [e.messages for e in log], expectations)
