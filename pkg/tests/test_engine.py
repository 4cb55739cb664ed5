"""Test the concurrent engine against mock endpoints."""

import asyncio
import json
import math

import httpx
import pytest

from lalmeval.config.effective import resolve_effective_settings
from lalmeval.domain.errors import ChainFailedError
from lalmeval.domain.models import (
    EfficiencyRecord,
    EndpointSpec,
    MockBehavior,
    RawPrediction,
    SampleRecord,
    Shard,
    TaskSpec,
)
from lalmeval.engine.dispatcher import Dispatcher
from lalmeval.engine.runner import EngineRun, run_engine, run_multi_turn
from lalmeval.metrics.efficiency import rtf, samples_per_second
from lalmeval.mocklalm.checks import scripted_turn_check
from lalmeval.mocklalm.server import MockServerHandle, serve
from lalmeval.scheduler.permits import PermitPool
from tests.factories import endpoint, sample, task


def _run(
    samples: list[SampleRecord],
    models: list[EndpointSpec],
    spec: TaskSpec | None = None,
    *,
    limit: int = 8,
    stagger_ms: float = 0.0,
    http: httpx.AsyncClient | None = None,
) -> tuple[list[RawPrediction], EngineRun]:
    run = EngineRun(task=spec or task(), shard=Shard(endpoint_name=models[0].name, samples=samples), models=models)

    async def scenario() -> list[RawPrediction]:
        async with Dispatcher(PermitPool(limit), http=http) as dispatcher:
            return await run_engine(run, dispatcher, stagger_ms=stagger_ms)

    return asyncio.run(scenario()), run


class TestRunEngine:
    """Tests for run_engine."""

    def test_two_samples_two_models(self, echo_server: MockServerHandle) -> None:
        """2 samples x 2 models give 4 predictions sorted by (sample_id, model_name)."""
        models = [endpoint("m2", echo_server.base_url), endpoint("m1", echo_server.base_url)]
        samples = [sample("s2", text="second"), sample("s1", text="first")]

        predictions, run = _run(samples, models)

        assert [(p.sample_id, p.model_name) for p in predictions] == [
            ("s1", "m1"),
            ("s1", "m2"),
            ("s2", "m1"),
            ("s2", "m2"),
        ]
        assert [p.turn_outputs for p in predictions] == [["first"], ["first"], ["second"], ["second"]]
        assert all(p.error is None and p.attempts == 1 for p in predictions)
        assert run.wall_clock_s > 0

    def test_always_failing(self, failing_server: MockServerHandle) -> None:
        """Every prediction carries an error after retry_limit + 1 attempts."""
        model = endpoint("m1", failing_server.base_url, retry_limit=1)

        predictions, _ = _run([sample("s1"), sample("s2")], [model])

        assert len(predictions) == 2
        for prediction in predictions:
            assert prediction.turn_outputs == []
            assert prediction.attempts == 2
            assert prediction.error is not None
            assert prediction.error.startswith("turn 1/1:")
            assert "HTTP 500" in prediction.error
        assert failing_server.stats().requests_received == 4

    def test_retry_recovers(self) -> None:
        """A sample failing once succeeds on its second attempt."""
        with serve(MockBehavior(fail_first_n=1)) as handle:
            model = endpoint("m1", handle.base_url, retry_limit=2)
            predictions, _ = _run([sample("s1")], [model])

        assert predictions[0].error is None
        assert predictions[0].attempts == 2

    def test_pool_limit_one(self) -> None:
        """With one global permit the mock never sees two requests at once."""
        with serve(MockBehavior(latency_s=0.02)) as handle:
            models = [endpoint("m1", handle.base_url, capacity=4), endpoint("m2", handle.base_url, capacity=4)]
            predictions, _ = _run([sample(f"s{i}") for i in range(5)], models, limit=1)
            stats = handle.stats()

        assert len(predictions) == 10
        assert stats.requests_received == 10
        assert stats.max_concurrent_observed == 1

    def test_endpoint_capacity_bounds_concurrency(self) -> None:
        """An endpoint never receives more than its capacity in flight."""
        with serve(MockBehavior(latency_s=0.05)) as handle:
            model = endpoint("m1", handle.base_url, capacity=3)
            _run([sample(f"s{i}") for i in range(12)], [model], limit=8)
            stats = handle.stats()

        assert stats.max_concurrent_observed == 3

    def test_stagger_delays_second_model(self) -> None:
        """The second model's first request waits one stagger step."""
        with serve(MockBehavior()) as handle:
            models = [endpoint("m1", handle.base_url), endpoint("m2", handle.base_url)]
            _run([sample("s1")], models, stagger_ms=150)
            arrivals = sorted(e.arrival_s for e in handle.stats().per_request_log)

        assert arrivals[1] - arrivals[0] >= 0.12

    def test_rejects_empty_engine(self) -> None:
        """An engine needs samples and models."""
        with pytest.raises(ValueError):
            _run([], [endpoint()])


class TestMultiTurn:
    """Tests for multi-turn chains."""

    def test_three_turn_chain(self, echo_server: MockServerHandle) -> None:
        """Request k of a chain carries 2k - 1 messages."""
        spec = task(multi_turn=True)
        record = sample("s1", turns=["one", "two", "three"])

        predictions, _ = _run([record], [endpoint("m1", echo_server.base_url)], spec)

        assert predictions[0].turn_outputs == ["one", "two", "three"]
        assert predictions[0].attempts == 3
        scripted_turn_check(echo_server, [1, 3, 5])

    def test_system_prompt_counts(self, echo_server: MockServerHandle) -> None:
        """A system prompt adds one message to every request."""
        spec = task(multi_turn=True, system_prompt="Answer briefly.")

        _run([sample("s1", turns=["a", "b"])], [endpoint("m1", echo_server.base_url)], spec)

        scripted_turn_check(echo_server, [2, 4])

    def test_single_turn_task_sends_first_turn(self, echo_server: MockServerHandle) -> None:
        """Without multi_turn only the first user turn is sent."""
        predictions, _ = _run([sample("s1", turns=["one", "two"])], [endpoint("m1", echo_server.base_url)])

        assert predictions[0].turn_outputs == ["one"]
        scripted_turn_check(echo_server, [1])

    def test_interleaved_chains(self, echo_server: MockServerHandle) -> None:
        """Concurrent chains each grow 1, 3, 5 under their own sample key."""
        spec = task(multi_turn=True)
        samples = [sample(f"s{i}", turns=[f"s{i} t1", f"s{i} t2", f"s{i} t3"]) for i in range(4)]

        predictions, _ = _run(samples, [endpoint("m1", echo_server.base_url, capacity=4)], spec)

        assert all(p.error is None for p in predictions)
        scripted_turn_check(echo_server, {f"s{i}": [1, 3, 5] for i in range(4)})

    def test_failure_stops_chain(self) -> None:
        """A turn-2 failure ends the chain; turn 3 is never sent."""
        seen: list[int] = []

        def handler(request: httpx.Request) -> httpx.Response:
            messages = json.loads(request.content)["messages"]
            seen.append(len(messages))
            if len(messages) == 3:
                return httpx.Response(503, text="overloaded")
            text = messages[-1]["content"][0]["text"]
            return httpx.Response(200, json={"choices": [{"message": {"content": text}, "finish_reason": "stop"}]})

        spec = task(multi_turn=True)
        model = endpoint("m1", "http://mock.local/v1", retry_limit=1)
        http = httpx.AsyncClient(transport=httpx.MockTransport(handler))

        predictions, _ = _run([sample("s1", turns=["one", "two", "three"])], [model], spec, http=http)

        assert seen == [1, 3, 3]
        assert predictions[0].turn_outputs == []
        assert predictions[0].attempts == 3
        assert predictions[0].error is not None
        assert predictions[0].error.startswith("turn 2/3:")

    def test_chain_error_keeps_partial_outputs(self) -> None:
        """The raised ChainFailedError carries the outputs gathered so far."""

        def handler(request: httpx.Request) -> httpx.Response:
            messages = json.loads(request.content)["messages"]
            if len(messages) > 1:
                return httpx.Response(400, text="bad request")
            return httpx.Response(200, json={"choices": [{"message": {"content": "first reply"}}]})

        spec = task(multi_turn=True)
        model = endpoint("m1", "http://mock.local/v1", retry_limit=3)
        record = sample("s1", turns=["one", "two", "three"])
        settings = resolve_effective_settings(spec, model)

        async def scenario() -> None:
            http = httpx.AsyncClient(transport=httpx.MockTransport(handler))
            async with Dispatcher(PermitPool(2), http=http) as dispatcher:
                with pytest.raises(ChainFailedError) as exc_info:
                    await run_multi_turn(record, model, task=spec, settings=settings, dispatcher=dispatcher)
            error = exc_info.value
            assert error.outputs == ["first reply"]
            assert error.turn_index == 1
            assert error.attempts == 2

        asyncio.run(scenario())


THROUGHPUT_LIMITS = (1, 4, 10)


@pytest.mark.slow
class TestThroughput:
    """Timing of a 100-sample run against a constant-latency mock as the permit limit grows."""

    SAMPLES = 100
    LATENCY_S = 0.5
    CLIP_S = 2.0

    def _measure(self, limit: int) -> tuple[EngineRun, int]:
        with serve(MockBehavior(latency_s=self.LATENCY_S)) as handle:
            model = endpoint("m1", handle.base_url, capacity=max(THROUGHPUT_LIMITS))
            samples = [sample(f"s{i:03d}", duration_s=self.CLIP_S) for i in range(self.SAMPLES)]
            predictions, run = _run(samples, [model], limit=limit)
            peak = handle.stats().max_concurrent_observed

        assert all(p.error is None for p in predictions)
        return run, peak

    @pytest.mark.parametrize("limit", THROUGHPUT_LIMITS)
    def test_wall_clock_follows_permit_limit(self, limit: int) -> None:
        """N requests take ceil(N / L) x latency within 20%, with exactly L in flight at the peak."""
        run, peak = self._measure(limit)

        expected = math.ceil(self.SAMPLES / limit) * self.LATENCY_S
        assert 0.8 * expected <= run.wall_clock_s <= 1.2 * expected
        assert peak == limit

    def test_efficiency_at_ten_permits(self) -> None:
        """100 clips of 2 s at L=10 give about 20 samples/s and an RTF of about 0.025."""
        run, _ = self._measure(10)
        record = EfficiencyRecord(
            total_audio_s=self.SAMPLES * self.CLIP_S, wall_clock_s=run.wall_clock_s, samples_processed=self.SAMPLES
        )

        assert 16.0 <= samples_per_second(record) <= 24.0
        assert 0.02 <= rtf(record) <= 0.03
