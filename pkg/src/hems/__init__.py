"""Agentic home energy management: LLM-orchestrated appliance scheduling."""

__version__ = "0.1.0"

from .domain import (
    APPLIANCES,
    ApplianceSpec,
    BinarySchedule,
    DeadlineConstraint,
    PriceCurve,
    schedule_from_start,
    slot_to_time,
    validate_schedule,
)
from .optimizer import (
    OptimalPlan,
    WindowSums,
    calculate_window_sums,
    most_expensive_window,
    optimal_plan,
    optimal_start,
)

__all__ = [
    "APPLIANCES",
    "ApplianceSpec",
    "BinarySchedule",
    "DeadlineConstraint",
    "OptimalPlan",
    "PriceCurve",
    "WindowSums",
    "calculate_window_sums",
    "most_expensive_window",
    "optimal_plan",
    "optimal_start",
    "schedule_from_start",
    "slot_to_time",
    "validate_schedule",
]
