"""Test permit pools, retry execution and dispatch staggering."""

import asyncio
import time

import pytest

from lalmeval.domain.errors import (
    HttpStatusError,
    PermitReleasedError,
    PoolClosedError,
    RequestTimeoutError,
    RetriesExhaustedError,
)
from lalmeval.scheduler.permits import PermitPool
from lalmeval.scheduler.retry import RetryPolicy, execute_with_retry, is_retryable
from lalmeval.scheduler.stagger import StaggerPlan, sleep_stagger, stagger_delay


class TestPermitPool:
    """Tests for the global permit pool."""

    def test_limit_one_is_mutually_exclusive(self) -> None:
        """With limit 1 the second acquirer waits for the first release."""

        async def scenario() -> list[str]:
            pool = PermitPool(1)
            events: list[str] = []
            first = await pool.acquire()
            second = asyncio.create_task(pool.acquire())
            await asyncio.sleep(0.01)
            events.append("second done" if second.done() else "second waiting")
            first.release()
            permit = await asyncio.wait_for(second, 1.0)
            events.append("second acquired")
            permit.release()
            return events

        assert asyncio.run(scenario()) == ["second waiting", "second acquired"]

    def test_counting_semantics(self) -> None:
        """N acquisitions succeed at once; the next one blocks."""

        async def scenario() -> None:
            pool = PermitPool(3)
            permits = [await asyncio.wait_for(pool.acquire(), 0.1) for _ in range(3)]
            assert pool.in_flight == 3
            blocked = asyncio.create_task(pool.acquire())
            await asyncio.sleep(0.01)
            assert not blocked.done()
            assert pool.waiting == 1
            permits[0].release()
            extra = await asyncio.wait_for(blocked, 1.0)
            assert pool.in_flight == 3
            for permit in [*permits[1:], extra]:
                permit.release()
            assert pool.in_flight == 0

        asyncio.run(scenario())

    def test_stress_returns_to_zero(self) -> None:
        """1000 acquire/release pairs over many workers never exceed the limit."""

        async def scenario() -> PermitPool:
            pool = PermitPool(7)
            peak = 0

            async def worker() -> None:
                nonlocal peak
                for _ in range(20):
                    async with pool.permit():
                        peak = max(peak, pool.in_flight)
                        await asyncio.sleep(0)

            await asyncio.gather(*(worker() for _ in range(50)))
            assert peak == 7
            return pool

        pool = asyncio.run(scenario())
        assert pool.in_flight == 0
        assert pool.acquired_total == pool.released_total == 1000
        assert pool.high_water == 7

    def test_waiters_served_in_fifo_order(self) -> None:
        """A released permit goes to the oldest waiter."""

        async def scenario() -> list[int]:
            pool = PermitPool(1)
            order: list[int] = []
            holder = await pool.acquire()

            async def waiter(index: int) -> None:
                async with pool.permit():
                    order.append(index)

            tasks = [asyncio.create_task(waiter(i)) for i in range(5)]
            await asyncio.sleep(0)
            holder.release()
            await asyncio.gather(*tasks)
            return order

        assert asyncio.run(scenario()) == [0, 1, 2, 3, 4]

    def test_double_release(self) -> None:
        """A permit can only be released once."""

        async def scenario() -> None:
            pool = PermitPool(2)
            permit = await pool.acquire()
            permit.release()
            with pytest.raises(PermitReleasedError):
                permit.release()
            assert pool.in_flight == 0

        asyncio.run(scenario())

    def test_cancelled_waiter_leaves_no_trace(self) -> None:
        """Cancelling a queued acquire does not leak a slot."""

        async def scenario() -> int:
            pool = PermitPool(1)
            holder = await pool.acquire()
            queued = asyncio.create_task(pool.acquire())
            await asyncio.sleep(0)
            queued.cancel()
            await asyncio.gather(queued, return_exceptions=True)
            holder.release()
            return pool.in_flight

        assert asyncio.run(scenario()) == 0

    def test_cancel_after_hand_off(self) -> None:
        """A slot handed to a waiter that is then cancelled is passed on."""

        async def scenario() -> int:
            pool = PermitPool(1)
            holder = await pool.acquire()
            queued = asyncio.create_task(pool.acquire())
            await asyncio.sleep(0)
            holder.release()
            queued.cancel()
            await asyncio.gather(queued, return_exceptions=True)
            return pool.in_flight

        assert asyncio.run(scenario()) == 0

    def test_close_fails_waiters(self) -> None:
        """Closing the pool fails current waiters and later acquisitions."""

        async def scenario() -> None:
            pool = PermitPool(1)
            await pool.acquire()
            queued = asyncio.create_task(pool.acquire())
            await asyncio.sleep(0)
            pool.close()
            with pytest.raises(PoolClosedError):
                await queued
            with pytest.raises(PoolClosedError):
                await pool.acquire()

        asyncio.run(scenario())

    def test_limit_must_be_positive(self) -> None:
        """A pool needs at least one permit."""
        with pytest.raises(ValueError):
            PermitPool(0)


class TestExecuteWithRetry:
    """Tests for retry-with-timeout execution."""

    def test_fails_once_then_succeeds(self) -> None:
        """One failure with retry_limit 1 succeeds on attempt 2."""
        calls = 0

        async def flaky() -> str:
            nonlocal calls
            calls += 1
            if calls == 1:
                raise HttpStatusError(503, retryable=True)
            return "ok"

        async def scenario() -> tuple[str, int, int]:
            pool = PermitPool(2)
            outcome = await execute_with_retry(flaky, RetryPolicy(retry_limit=1, timeout_s=1.0), pool)
            return outcome.value, outcome.attempts, pool.in_flight

        assert asyncio.run(scenario()) == ("ok", 2, 0)

    def test_always_failing_without_retries(self) -> None:
        """retry_limit 0 gives up after a single attempt."""

        async def broken() -> str:
            raise RuntimeError("boom")

        async def scenario() -> None:
            with pytest.raises(RetriesExhaustedError) as exc_info:
                await execute_with_retry(broken, RetryPolicy(retry_limit=0, timeout_s=1.0), PermitPool(1))
            assert exc_info.value.attempts == 1
            assert isinstance(exc_info.value.last_error, RuntimeError)
            assert "RuntimeError: boom" in exc_info.value.message

        asyncio.run(scenario())

    def test_timeout(self) -> None:
        """An action sleeping twice the timeout ends in a timeout error."""

        async def slow() -> str:
            await asyncio.sleep(0.2)
            return "late"

        async def scenario() -> None:
            with pytest.raises(RetriesExhaustedError) as exc_info:
                await execute_with_retry(slow, RetryPolicy(retry_limit=0, timeout_s=0.1), PermitPool(1))
            assert exc_info.value.attempts == 1
            assert isinstance(exc_info.value.last_error, RequestTimeoutError)

        asyncio.run(scenario())

    def test_non_retryable_stops_early(self) -> None:
        """A 400 is final even with retries left."""
        calls = 0

        async def rejected() -> str:
            nonlocal calls
            calls += 1
            raise HttpStatusError(400, retryable=False)

        async def scenario() -> None:
            with pytest.raises(RetriesExhaustedError) as exc_info:
                await execute_with_retry(rejected, RetryPolicy(retry_limit=3, timeout_s=1.0), PermitPool(1))
            assert exc_info.value.attempts == 1

        asyncio.run(scenario())
        assert calls == 1

    def test_permits_returned_during_retry_wait(self) -> None:
        """The retry pause holds no permit, so other work proceeds."""

        async def scenario() -> list[str]:
            pool = PermitPool(1)
            events: list[str] = []

            async def failing() -> str:
                events.append("attempt")
                raise HttpStatusError(500, retryable=True)

            async def other() -> None:
                await asyncio.sleep(0.02)
                async with pool.permit():
                    events.append("other")

            with pytest.raises(RetriesExhaustedError):
                await asyncio.gather(
                    execute_with_retry(failing, RetryPolicy(retry_limit=1, timeout_s=1.0, retry_wait_s=0.1), pool),
                    other(),
                )
            assert pool.in_flight == 0
            return events

        assert asyncio.run(scenario()) == ["attempt", "other", "attempt"]

    def test_endpoint_pool_bounds_attempts(self) -> None:
        """Attempts hold the endpoint permit as well as the global one."""

        async def scenario() -> tuple[int, int]:
            pool = PermitPool(10)
            endpoint_pool = PermitPool(2, name="e1")

            async def work() -> int:
                await asyncio.sleep(0.01)
                return endpoint_pool.in_flight

            policy = RetryPolicy(retry_limit=0, timeout_s=1.0)
            outcomes = await asyncio.gather(
                *(execute_with_retry(work, policy, pool, endpoint_pool=endpoint_pool) for _ in range(6))
            )
            return max(o.value for o in outcomes), pool.high_water

        assert asyncio.run(scenario()) == (2, 2)

    def test_closed_pool_propagates(self) -> None:
        """A closed pool is not retried."""

        async def never() -> str:
            return "unreachable"

        async def scenario() -> None:
            pool = PermitPool(1)
            pool.close()
            with pytest.raises(PoolClosedError):
                await execute_with_retry(never, RetryPolicy(retry_limit=5, timeout_s=1.0), pool)

        asyncio.run(scenario())

    def test_policy_validation(self) -> None:
        """Negative retries and non-positive timeouts are rejected."""
        with pytest.raises(ValueError):
            RetryPolicy(retry_limit=-1, timeout_s=1.0)
        with pytest.raises(ValueError):
            RetryPolicy(retry_limit=0, timeout_s=0.0)
        assert RetryPolicy(retry_limit=2, timeout_s=1.0).max_attempts == 3

    def test_retryable_classification(self) -> None:
        """Client errors carry their own flag; other errors are transient."""
        assert is_retryable(HttpStatusError(500, retryable=True))
        assert not is_retryable(HttpStatusError(404, retryable=False))
        assert is_retryable(RequestTimeoutError(1.0))
        assert is_retryable(ConnectionResetError())


class TestStagger:
    """Tests for per-model dispatch delays."""

    def test_first_model_undelayed(self) -> None:
        """Index 0 never waits."""
        assert stagger_delay(StaggerPlan(base_delay_ms=50, model_index=0)) == 0

    def test_linear_delay(self) -> None:
        """Index 3 with a 50 ms step waits 150 ms."""
        assert stagger_delay(StaggerPlan(base_delay_ms=50, model_index=3)) == 150

    def test_disabled(self) -> None:
        """A zero step disables staggering."""
        assert stagger_delay(StaggerPlan(base_delay_ms=0, model_index=9)) == 0

    def test_negative_values_rejected(self) -> None:
        """Steps and indices are non-negative."""
        with pytest.raises(ValueError):
            StaggerPlan(base_delay_ms=-1, model_index=0)
        with pytest.raises(ValueError):
            StaggerPlan(base_delay_ms=10, model_index=-1)

    def test_sleep_matches_delay(self) -> None:
        """sleep_stagger waits at least the planned delay."""
        started = time.monotonic()
        asyncio.run(sleep_stagger(StaggerPlan(base_delay_ms=40, model_index=2)))
        assert time.monotonic() - started >= 0.075
