"""Independent oracles used by the tests: direct slice sums, no prefix sums.

Kept deliberately separate from the package so regressions in the
optimizer's fast path cannot hide behind shared code.
"""

from __future__ import annotations

from typing import Optional, Sequence


def brute_window_sums(prices: Sequence[float], window_size: int) -> list[float]:
    return [
        sum(prices[i : i + window_size])
        for i in range(len(prices) - window_size + 1)
    ]


def brute_argmin(sums: Sequence[float], upper: Optional[int] = None) -> int:
    upper = len(sums) - 1 if upper is None else upper
    best = 0
    for i in range(1, upper + 1):
        if sums[i] < sums[best]:
            best = i
    return best


def brute_argmax(sums: Sequence[float]) -> int:
    best = 0
    for i in range(1, len(sums)):
        if sums[i] > sums[best]:
            best = i
    return best


def brute_optimal_start(
    prices: Sequence[float],
    duration: int,
    max_start: int,
    finish_by: Optional[int] = None,
) -> tuple[int, float]:
    """Enumerate every feasible start directly; earliest wins ties."""
    upper = max_start
    if finish_by is not None:
        upper = min(upper, finish_by - duration)
    assert upper >= 0, "caller must supply a feasible region"
    best_start = 0
    best_sum = sum(prices[0:duration])
    for start in range(1, upper + 1):
        s = sum(prices[start : start + duration])
        if s < best_sum:
            best_sum = s
            best_start = start
    return best_start, best_sum
