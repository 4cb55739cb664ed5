"""Mutable state of a mock endpoint: counters, failure script, generator.

Counters are updated under a lock that is never held across an await, so
they stay exact whether the app runs on uvicorn or inside a test client.
"""

import hashlib
import random
import threading
import time
from dataclasses import dataclass

from lalmeval.domain.models import CompletionRequest, MockBehavior, MockStats, RequestLogEntry


@dataclass(frozen=True)
class Admission:
    """Decision taken when a request arrives.

    Attributes:
        sample_key: Key of the sample the request belongs to.
        latency_s: Time to wait before answering.
        fail: Whether to answer with the injected failure status.
        number: Arrival rank of the request since the last reset.
    """

    sample_key: str
    latency_s: float
    fail: bool
    number: int


def sample_key(request: CompletionRequest, header: str | None) -> str:
    """Key of a request: the ``X-Sample-Id`` header, else a hash of the first user text."""
    if header:
        return header
    first_user = next((m.text for m in request.messages if m.role == "user"), "")
    return hashlib.sha256(first_user.encode("utf-8")).hexdigest()[:16]


def reply_text(request: CompletionRequest, key: str, behavior: MockBehavior) -> str:
    """Scripted reply of a sample, else an echo of the last user text."""
    if key in behavior.response_script:
        return behavior.response_script[key]
    return next((m.text for m in reversed(request.messages) if m.role == "user"), "")


class MockState:
    """Counters and scripted behavior of one mock server."""

    def __init__(self, behavior: MockBehavior) -> None:
        self.behavior = behavior
        self._lock = threading.Lock()
        self._reset_locked()

    def _reset_locked(self) -> None:
        self._rng = random.Random(self.behavior.seed)
        self._failures: dict[str, int] = {}
        self._stats = MockStats()
        self._started = time.monotonic()

    def reset(self) -> None:
        """Zero counters and restart the seeded generator."""
        with self._lock:
            self._reset_locked()

    def admit(self, request: CompletionRequest, header: str | None) -> Admission:
        """Record an arriving request and decide its fate."""
        key = sample_key(request, header)
        with self._lock:
            stats = self._stats
            stats.requests_received += 1
            number = stats.requests_received
            stats.in_flight += 1
            stats.max_concurrent_observed = max(stats.max_concurrent_observed, stats.in_flight)
            stats.audio_bytes_received += request.audio_chars

            failed_so_far = self._failures.get(key, 0)
            if failed_so_far < self.behavior.fail_first_n:
                self._failures[key] = failed_so_far + 1
                fail = True
            else:
                fail = self.behavior.fail_prob > 0 and self._rng.random() < self.behavior.fail_prob
            if fail:
                stats.failures_injected += 1

            latency = self.behavior.latency_s
            latency_s = latency if isinstance(latency, float) else self._rng.uniform(latency.min_s, latency.max_s)

            stats.per_request_log.append(
                RequestLogEntry(
                    arrival_s=time.monotonic() - self._started,
                    messages=len(request.messages),
                    sample_key=key,
                    status=self.behavior.fail_status if fail else 200,
                )
            )
        return Admission(sample_key=key, latency_s=latency_s, fail=fail, number=number)

    def finish(self) -> None:
        """Record that a request left the server."""
        with self._lock:
            self._stats.in_flight -= 1

    def snapshot(self) -> MockStats:
        """Copy of the current counters."""
        with self._lock:
            return self._stats.model_copy(deep=True)
