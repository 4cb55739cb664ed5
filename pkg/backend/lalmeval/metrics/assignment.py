"""Minimum-cost one-to-one matching of speaker labels.

Small instances are searched exhaustively over permutations; larger ones go
to the OR-Tools linear-sum assignment solver. Rectangular cost matrices are
padded to square with zero-cost dummy rows or columns, so unmatched labels
simply pair with a dummy.
"""

import itertools
from collections.abc import Sequence
from typing import Literal

from ortools.graph.python import linear_sum_assignment

from lalmeval.domain.errors import MetricError

MatchMethod = Literal["auto", "exhaustive", "assignment"]
EXHAUSTIVE_MAX_LABELS = 8


def pad_square(cost: Sequence[Sequence[int]]) -> list[list[int]]:
    """Pad a rectangular matrix with zero entries to a square one."""
    rows = len(cost)
    cols = max((len(row) for row in cost), default=0)
    size = max(rows, cols)
    padded = [list(row) + [0] * (size - len(row)) for row in cost]
    padded.extend([0] * size for _ in range(size - rows))
    return padded


def _exhaustive(cost: list[list[int]]) -> tuple[int, list[int]]:
    size = len(cost)
    best_total: int | None = None
    best_perm: tuple[int, ...] = ()
    for perm in itertools.permutations(range(size)):
        total = sum(cost[i][perm[i]] for i in range(size))
        if best_total is None or total < best_total:
            best_total, best_perm = total, perm
    return best_total or 0, list(best_perm)


def _solver(cost: list[list[int]]) -> tuple[int, list[int]]:
    assignment = linear_sum_assignment.SimpleLinearSumAssignment()
    size = len(cost)
    for i in range(size):
        for j in range(size):
            assignment.add_arc_with_cost(i, j, cost[i][j])
    status = assignment.solve()
    if status != assignment.OPTIMAL:
        raise MetricError(f"Linear sum assignment failed with status {status}")
    return assignment.optimal_cost(), [assignment.right_mate(i) for i in range(size)]


def min_cost_matching(
    cost: Sequence[Sequence[int]], method: MatchMethod = "auto"
) -> tuple[int, list[tuple[int, int]]]:
    """Find the one-to-one row/column matching of minimum total cost.

    Args:
        cost: Non-negative integer costs, rows x columns (may be rectangular).
        method: ``exhaustive``, ``assignment``, or ``auto`` (exhaustive up to
            eight labels per side).

    Returns:
        Total cost including dummy pairs (always zero) and the matched
        (row, column) pairs of real rows and columns.
    """
    rows = len(cost)
    cols = max((len(row) for row in cost), default=0)
    if rows == 0 or cols == 0:
        return 0, []
    padded = pad_square(cost)
    if method == "auto":
        method = "exhaustive" if len(padded) <= EXHAUSTIVE_MAX_LABELS else "assignment"
    total, mates = _exhaustive(padded) if method == "exhaustive" else _solver(padded)
    pairs = [(i, j) for i, j in enumerate(mates) if i < rows and j < cols]
    return total, pairs
