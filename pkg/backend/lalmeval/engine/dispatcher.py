"""Shared request dispatch for a run.

Every inference request of a run, model or judge, goes through one
Dispatcher. It owns the HTTP connection pool, the global permit pool, one
capacity pool per endpoint and one judge pool per task, and applies the
retry policy. Judge pools live apart from endpoint pools, so a judge sharing
a name with a model endpoint never borrows its capacity.
"""

from collections.abc import Iterable
from types import TracebackType
from typing import Any, Self

import httpx

from lalmeval.client.transport import create_http_client, send_request
from lalmeval.domain.models import ChatResponse, EndpointSpec, JudgeSpec
from lalmeval.scheduler.permits import PermitPool
from lalmeval.scheduler.retry import Outcome, RetryPolicy, execute_with_retry


class Dispatcher:
    """Routes requests to endpoints under the run's permit discipline.

    Attributes:
        pool: Global permit pool.
        http: Shared HTTP client.
    """

    def __init__(self, pool: PermitPool, http: httpx.AsyncClient | None = None) -> None:
        self.pool = pool
        self.http = http if http is not None else create_http_client()
        self._endpoint_pools: dict[str, PermitPool] = {}
        self._judge_pools: dict[str, PermitPool] = {}

    def register(self, endpoint: EndpointSpec) -> PermitPool:
        """Create the capacity pool of an endpoint.

        Args:
            endpoint: Endpoint to register; registering twice keeps the first pool.

        Returns:
            The endpoint's pool, sized by its capacity.
        """
        if endpoint.name not in self._endpoint_pools:
            self._endpoint_pools[endpoint.name] = PermitPool(endpoint.capacity, name=endpoint.name)
        return self._endpoint_pools[endpoint.name]

    def register_all(self, endpoints: Iterable[EndpointSpec]) -> None:
        """Register endpoints with their own capacity."""
        for endpoint in endpoints:
            self.register(endpoint)

    def endpoint_pool(self, endpoint: EndpointSpec) -> PermitPool:
        """Capacity pool of an endpoint, registering it on first use."""
        return self.register(endpoint)

    def judge_pool(self, key: str, judge: JudgeSpec) -> PermitPool:
        """Judge pool of one task, sized by its ``judge_concurrency``.

        Args:
            key: Owner of the pool, normally the task name.
            judge: Judge configuration of that task.
        """
        if key not in self._judge_pools:
            self._judge_pools[key] = PermitPool(judge.judge_concurrency, name=f"judge:{key}")
        return self._judge_pools[key]

    async def request(
        self,
        endpoint: EndpointSpec,
        request: dict[str, Any],
        policy: RetryPolicy,
        *,
        sample_id: str | None = None,
        label: str | None = None,
        endpoint_pool: PermitPool | None = None,
    ) -> Outcome[ChatResponse]:
        """Send a request with retries.

        Each attempt holds a global permit and a permit of ``endpoint_pool``,
        which defaults to the capacity pool of ``endpoint``.

        Raises:
            RetriesExhaustedError: Every attempt failed.
        """

        async def attempt() -> ChatResponse:
            return await send_request(endpoint, request, policy.timeout_s, http=self.http, sample_id=sample_id)

        return await execute_with_retry(
            attempt,
            policy,
            self.pool,
            endpoint_pool=endpoint_pool if endpoint_pool is not None else self.endpoint_pool(endpoint),
            label=label or f"{endpoint.name}:{sample_id}",
        )

    async def aclose(self) -> None:
        """Fail pending waiters and close the HTTP client."""
        self.pool.close()
        for pool in [*self._endpoint_pools.values(), *self._judge_pools.values()]:
            pool.close()
        await self.http.aclose()

    async def __aenter__(self) -> Self:
        return self

    async def __aexit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        await self.aclose()
