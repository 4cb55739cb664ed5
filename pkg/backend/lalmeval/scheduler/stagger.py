"""Per-model dispatch staggering."""

import asyncio
from dataclasses import dataclass


@dataclass(frozen=True)
class StaggerPlan:
    """Delay plan of one model within an engine.

    Attributes:
        base_delay_ms: Delay step between consecutive models; 0 disables staggering.
        model_index: Position of the model in its engine.
    """

    base_delay_ms: float
    model_index: int

    def __post_init__(self) -> None:
        if self.base_delay_ms < 0:
            raise ValueError(f"base_delay_ms must be >= 0, got {self.base_delay_ms}")
        if self.model_index < 0:
            raise ValueError(f"model_index must be >= 0, got {self.model_index}")


def stagger_delay(plan: StaggerPlan) -> float:
    """Delay before a model's first dispatch, in milliseconds.

    The first model is never delayed; each later model waits one more step.
    """
    return plan.model_index * plan.base_delay_ms


async def sleep_stagger(plan: StaggerPlan) -> None:
    """Sleep for the plan's delay."""
    delay_ms = stagger_delay(plan)
    if delay_ms > 0:
        await asyncio.sleep(delay_ms / 1000)
