"""Retry-with-timeout execution under the permit discipline."""

import asyncio
from collections.abc import Awaitable, Callable
from contextlib import AsyncExitStack
from dataclasses import dataclass

from lalmeval.core.logging import get_logger
from lalmeval.domain.errors import (
    ClientError,
    PoolClosedError,
    RequestTimeoutError,
    RetriesExhaustedError,
    describe_error,
)
from lalmeval.domain.models import EffectiveSettings
from lalmeval.scheduler.permits import PermitPool

logger = get_logger(__name__)


@dataclass(frozen=True)
class RetryPolicy:
    """How often and how long to try a request.

    Attributes:
        retry_limit: Retries after the first attempt.
        timeout_s: Per-attempt timeout.
        retry_wait_s: Fixed pause between attempts, taken without a permit.
    """

    retry_limit: int
    timeout_s: float
    retry_wait_s: float = 0.0

    def __post_init__(self) -> None:
        if self.retry_limit < 0:
            raise ValueError(f"retry_limit must be >= 0, got {self.retry_limit}")
        if self.timeout_s <= 0:
            raise ValueError(f"timeout_s must be > 0, got {self.timeout_s}")
        if self.retry_wait_s < 0:
            raise ValueError(f"retry_wait_s must be >= 0, got {self.retry_wait_s}")

    @property
    def max_attempts(self) -> int:
        """Total attempts allowed."""
        return self.retry_limit + 1

    @classmethod
    def from_settings(cls, settings: EffectiveSettings) -> "RetryPolicy":
        """Build the policy of an endpoint's effective settings."""
        return cls(
            retry_limit=settings.retry_limit,
            timeout_s=settings.timeout_s,
            retry_wait_s=settings.retry_wait_s,
        )


@dataclass(frozen=True)
class Outcome[T]:
    """Successful result of a retried action.

    Attributes:
        value: Result of the successful attempt.
        attempts: Attempts made, including the successful one.
    """

    value: T
    attempts: int


def is_retryable(error: BaseException) -> bool:
    """Whether another attempt may succeed after ``error``.

    Client errors carry their own classification; anything else (including
    timeouts) is treated as transient.
    """
    if isinstance(error, ClientError):
        return error.retryable
    return True


async def execute_with_retry[T](
    action: Callable[[], Awaitable[T]],
    policy: RetryPolicy,
    pool: PermitPool,
    endpoint_pool: PermitPool | None = None,
    label: str = "request",
) -> Outcome[T]:
    """Run ``action`` until it succeeds or the retry budget is spent.

    Every attempt holds a permit from ``endpoint_pool`` (if given) and from
    ``pool`` for its whole duration and gives both back before the retry
    wait. The endpoint permit is taken first, so a request queued on a
    saturated endpoint holds no global permit.

    Args:
        action: Zero-argument coroutine factory performing one attempt.
        policy: Retry budget and timeout.
        pool: Global permit pool.
        endpoint_pool: Per-endpoint capacity pool.
        label: Short description used in log lines.

    Returns:
        Outcome holding the value and the number of attempts.

    Raises:
        RetriesExhaustedError: All attempts failed, or a non-retryable error
            ended the loop early. Carries the last error.
        PoolClosedError: The pool was shut down.
    """
    last_error: BaseException | None = None
    attempts = 0
    for attempt in range(1, policy.max_attempts + 1):
        attempts = attempt
        try:
            async with AsyncExitStack() as stack:
                if endpoint_pool is not None:
                    await stack.enter_async_context(endpoint_pool.permit())
                await stack.enter_async_context(pool.permit())
                async with asyncio.timeout(policy.timeout_s):
                    value = await action()
            return Outcome(value=value, attempts=attempt)
        except PoolClosedError:
            raise
        except TimeoutError:
            last_error = RequestTimeoutError(policy.timeout_s)
        except Exception as e:
            last_error = e

        if not is_retryable(last_error):
            logger.warning("%s failed with non-retryable error: %s", label, describe_error(last_error))
            break
        if attempt < policy.max_attempts:
            logger.warning(
                "%s attempt %d/%d failed: %s", label, attempt, policy.max_attempts, describe_error(last_error)
            )
            if policy.retry_wait_s > 0:
                await asyncio.sleep(policy.retry_wait_s)

    assert last_error is not None
    raise RetriesExhaustedError(last_error, attempts)
