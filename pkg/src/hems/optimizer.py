"""Exact cost optimization over consecutive-slot windows.

Window sums are computed with running prefix sums; the minimum over all
feasible start slots is the exact optimum because every appliance runs
continuously, so the multi-appliance problem decomposes per appliance.
Ties always resolve to the earliest start slot.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import accumulate
from typing import Optional

from .domain import (
    APPLIANCES,
    SLOTS_PER_DAY,
    ApplianceSpec,
    DeadlineConstraint,
    PriceCurve,
)


class WindowSizeError(ValueError):
    """window_size out of [1, 96]; surfaced to the caller as a parameter error."""


class InfeasibleRegionError(ValueError):
    """No start slot satisfies the appliance and deadline constraints."""


@dataclass(frozen=True)
class WindowSums:
    """Sums over every consecutive window of window_size slots."""

    window_size: int
    sums: tuple[float, ...]
    min_window_index: int
    min_sum: float
    max_window_index: int
    max_sum: float


@dataclass(frozen=True)
class ApplianceOptimum:
    appliance_id: str
    start_slot: int
    price_sum: float


@dataclass(frozen=True)
class OptimalPlan:
    """Per-appliance optimal starts plus the combined objective value."""

    optima: tuple[ApplianceOptimum, ...]
    total_price_sum: float

    def start_of(self, appliance_id: str) -> int:
        for opt in self.optima:
            if opt.appliance_id == appliance_id:
                return opt.start_slot
        raise KeyError(appliance_id)


def calculate_window_sums(prices: PriceCurve, window_size: int) -> WindowSums:
    """All consecutive window sums of the given size, with argmin/argmax."""
    if not isinstance(window_size, int) or isinstance(window_size, bool):
        raise WindowSizeError(f"window_size must be an integer, got {window_size!r}")
    if not 1 <= window_size <= SLOTS_PER_DAY:
        raise WindowSizeError(f"window_size must be 1..96, got {window_size}")
    prefix = [0.0]
    prefix.extend(accumulate(prices.prices))
    sums = tuple(
        prefix[i + window_size] - prefix[i]
        for i in range(SLOTS_PER_DAY - window_size + 1)
    )
    min_idx = 0
    max_idx = 0
    for i, s in enumerate(sums):
        if s < sums[min_idx]:
            min_idx = i
        if s > sums[max_idx]:
            max_idx = i
    return WindowSums(
        window_size=window_size,
        sums=sums,
        min_window_index=min_idx,
        min_sum=sums[min_idx],
        max_window_index=max_idx,
        max_sum=sums[max_idx],
    )


def feasible_start_bound(spec: ApplianceSpec, deadline: Optional[DeadlineConstraint]) -> int:
    """Latest start slot satisfying both the appliance limit and the deadline.

    Raises InfeasibleRegionError naming the binding constraint when empty.
    """
    bound = spec.max_start_slot
    binding = f"{spec.id} latest start slot {spec.max_start_slot}"
    if deadline is not None:
        by_deadline = deadline.finish_by_slot - spec.duration_slots
        if by_deadline < bound:
            bound = by_deadline
            binding = (
                f"deadline finish_by_slot={deadline.finish_by_slot} "
                f"({deadline.origin}) leaves latest start {by_deadline}"
            )
    if bound < 0:
        raise InfeasibleRegionError(
            f"no feasible start for {spec.id}: {binding}"
        )
    return bound


def optimal_start(
    prices: PriceCurve,
    spec: ApplianceSpec,
    deadline: Optional[DeadlineConstraint] = None,
) -> tuple[int, float]:
    """Cheapest feasible start slot and its window sum (earliest on ties)."""
    bound = feasible_start_bound(spec, deadline)
    window = calculate_window_sums(prices, spec.duration_slots)
    best = 0
    for i in range(1, bound + 1):
        if window.sums[i] < window.sums[best]:
            best = i
    return best, window.sums[best]


def most_expensive_window(prices: PriceCurve, window_size: int = 12) -> tuple[int, float]:
    """Start slot and sum of the costliest consecutive window (default 3 h)."""
    window = calculate_window_sums(prices, window_size)
    return window.max_window_index, window.max_sum


def optimal_plan(
    prices: PriceCurve,
    specs: Optional[dict[str, ApplianceSpec]] = None,
    deadlines: Optional[dict[str, DeadlineConstraint]] = None,
) -> OptimalPlan:
    """Independent per-appliance optima; total is their sum."""
    specs = specs if specs is not None else APPLIANCES
    deadlines = deadlines or {}
    optima = []
    for spec in specs.values():
        start, price_sum = optimal_start(prices, spec, deadlines.get(spec.id))
        optima.append(ApplianceOptimum(spec.id, start, price_sum))
    return OptimalPlan(
        optima=tuple(optima),
        total_price_sum=sum(o.price_sum for o in optima),
    )
