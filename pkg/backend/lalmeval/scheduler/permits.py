"""Global pool of concurrency permits.

A permit grants one in-flight inference request. Permits are handed to
waiters in FIFO order: a released permit goes straight to the oldest waiter
without passing through the free count, so late arrivals cannot overtake.

The pool is bound to the event loop that uses it; all bookkeeping happens
between awaits, which makes the counters exact without locks.
"""

import asyncio
import time
from collections import deque
from types import TracebackType
from typing import Self

from lalmeval.domain.errors import PermitReleasedError, PoolClosedError


class Permit:
    """A concurrency slot drawn from a PermitPool.

    Released exactly once, either explicitly or by leaving an
    ``async with`` block.
    """

    __slots__ = ("_released", "acquired_at", "pool")

    def __init__(self, pool: "PermitPool", acquired_at: float) -> None:
        self.pool = pool
        self.acquired_at = acquired_at
        self._released = False

    @property
    def released(self) -> bool:
        """Whether the permit was returned to its pool."""
        return self._released

    def release(self) -> None:
        """Return the permit to its pool.

        Raises:
            PermitReleasedError: On a second release.
        """
        if self._released:
            raise PermitReleasedError()
        self._released = True
        self.pool._release()

    async def __aenter__(self) -> Self:
        return self

    async def __aexit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        if not self._released:
            self.release()


class PermitPool:
    """Counting pool of permits with FIFO waiters.

    Attributes:
        limit: Maximum permits in flight.
        name: Label used in logs.
    """

    def __init__(self, limit: int, name: str = "global") -> None:
        if limit < 1:
            raise ValueError(f"limit must be >= 1, got {limit}")
        self.limit = limit
        self.name = name
        self._in_flight = 0
        self._waiters: deque[asyncio.Future[None]] = deque()
        self._closed = False
        self.acquired_total = 0
        self.released_total = 0
        self.high_water = 0

    @property
    def in_flight(self) -> int:
        """Permits currently held."""
        return self._in_flight

    @property
    def waiting(self) -> int:
        """Callers blocked in ``acquire``."""
        return sum(1 for w in self._waiters if not w.done())

    @property
    def closed(self) -> bool:
        """Whether ``close`` was called."""
        return self._closed

    async def acquire(self) -> Permit:
        """Wait for a free slot and take it.

        Returns:
            A permit that must be released exactly once.

        Raises:
            PoolClosedError: If the pool is or gets closed while waiting.
        """
        if self._closed:
            raise PoolClosedError()

        if self._in_flight < self.limit and self.waiting == 0:
            self._in_flight += 1
        else:
            waiter: asyncio.Future[None] = asyncio.get_running_loop().create_future()
            self._waiters.append(waiter)
            try:
                await waiter
            except asyncio.CancelledError:
                if waiter.done() and not waiter.cancelled() and waiter.exception() is None:
                    # The slot was handed over just before cancellation; pass it on.
                    self._pass_slot()
                raise
            finally:
                if waiter in self._waiters:
                    self._waiters.remove(waiter)

        self.acquired_total += 1
        self.high_water = max(self.high_water, self._in_flight)
        return Permit(self, time.monotonic())

    def permit(self) -> "_PermitContext":
        """Acquire a permit as an async context manager.

        Example:
            async with pool.permit():
                await send()
        """
        return _PermitContext(self)

    def _release(self) -> None:
        self.released_total += 1
        self._pass_slot()

    def _pass_slot(self) -> None:
        while self._waiters:
            waiter = self._waiters.popleft()
            if not waiter.done():
                # Hand-off keeps in_flight unchanged.
                waiter.set_result(None)
                return
        self._in_flight -= 1

    def close(self) -> None:
        """Refuse new acquisitions and fail current waiters."""
        self._closed = True
        while self._waiters:
            waiter = self._waiters.popleft()
            if not waiter.done():
                waiter.set_exception(PoolClosedError())


class _PermitContext:
    __slots__ = ("_permit", "_pool")

    def __init__(self, pool: PermitPool) -> None:
        self._pool = pool
        self._permit: Permit | None = None

    async def __aenter__(self) -> Permit:
        self._permit = await self._pool.acquire()
        return self._permit

    async def __aexit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        if self._permit is not None and not self._permit.released:
            self._permit.release()
