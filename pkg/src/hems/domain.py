"""Core scheduling vocabulary: slots, price curves, appliances, binary schedules.

All prices are EUR/MWh internally. Providers that deliver EUR/kWh must
multiply by 1000 at ingestion. A day is 96 slots of 15 minutes, slot k
starting at minute 15*k after midnight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import Iterable

SLOTS_PER_DAY = 96
SLOT_HOURS = 0.25

WASHING_MACHINE = "washing_machine"
DISHWASHER = "dishwasher"
EV_CHARGER = "ev_charger"


class DomainError(Exception):
    """Base class for scheduling-domain violations."""


class SlotRangeError(DomainError):
    """Slot index outside [0, 95]."""


class InfeasibleStartError(DomainError):
    """Requested start slot exceeds the appliance's latest valid start."""

    def __init__(self, appliance_id: str, start: int, max_start_slot: int):
        self.appliance_id = appliance_id
        self.start = start
        self.max_start_slot = max_start_slot
        super().__init__(
            f"{appliance_id} cannot start at slot {start}: "
            f"latest valid start is slot {max_start_slot}"
        )


class ApplianceMismatchError(DomainError):
    """Schedule and constraint refer to different appliances."""


def slot_to_time(slot: int) -> str:
    """Zero-padded HH:MM at which the given slot starts (slot 14 -> "03:30")."""
    if not isinstance(slot, int) or isinstance(slot, bool):
        raise SlotRangeError(f"slot must be an integer, got {slot!r}")
    if not 0 <= slot < SLOTS_PER_DAY:
        raise SlotRangeError(f"slot must be in [0, 95], got {slot}")
    return f"{slot // 4:02d}:{15 * (slot % 4):02d}"


def time_to_slot(text: str) -> int:
    """Inverse of slot_to_time for quarter-hour HH:MM strings."""
    try:
        hh, mm = text.strip().split(":")
        hour, minute = int(hh), int(mm)
    except (ValueError, AttributeError):
        raise SlotRangeError(f"not an HH:MM time: {text!r}") from None
    if not (0 <= hour < 24 and minute in (0, 15, 30, 45)):
        raise SlotRangeError(f"not a quarter-hour time of day: {text!r}")
    return hour * 4 + minute // 15


@dataclass(frozen=True)
class PriceCurve:
    """96 day-ahead price points (EUR/MWh) for one market date."""

    prices: tuple[float, ...]
    market_date: date
    source: str = "fixture"  # "live_api" or "fixture"

    def __post_init__(self):
        if len(self.prices) != SLOTS_PER_DAY:
            raise DomainError(
                f"price curve must have exactly {SLOTS_PER_DAY} values, "
                f"got {len(self.prices)}"
            )
        if not all(math.isfinite(p) for p in self.prices):
            raise DomainError("price curve contains non-finite values")
        object.__setattr__(self, "prices", tuple(float(p) for p in self.prices))

    @classmethod
    def from_values(cls, values: Iterable[float], market_date: date, source: str = "fixture") -> "PriceCurve":
        return cls(prices=tuple(values), market_date=market_date, source=source)


@dataclass(frozen=True)
class ApplianceSpec:
    """Fixed run profile of one flexible load."""

    id: str
    power_kw: float
    duration_slots: int
    max_start_slot: int

    def __post_init__(self):
        if self.duration_slots <= 0:
            raise DomainError(f"{self.id}: duration_slots must be positive")
        if not 0 <= self.max_start_slot < SLOTS_PER_DAY:
            raise DomainError(f"{self.id}: max_start_slot must be in [0, 95]")
        if self.max_start_slot + self.duration_slots > SLOTS_PER_DAY:
            raise DomainError(
                f"{self.id}: max_start_slot {self.max_start_slot} + duration "
                f"{self.duration_slots} exceeds the 96-slot day"
            )


APPLIANCES: dict[str, ApplianceSpec] = {
    WASHING_MACHINE: ApplianceSpec(WASHING_MACHINE, power_kw=2.0, duration_slots=8, max_start_slot=88),
    DISHWASHER: ApplianceSpec(DISHWASHER, power_kw=1.8, duration_slots=6, max_start_slot=90),
    EV_CHARGER: ApplianceSpec(EV_CHARGER, power_kw=7.4, duration_slots=24, max_start_slot=4),
}

EV_DEFAULT_FINISH_BY_SLOT = 28  # ready by 07:00 unless the calendar says earlier


def appliance(appliance_id: str) -> ApplianceSpec:
    try:
        return APPLIANCES[appliance_id]
    except KeyError:
        raise DomainError(f"unknown appliance: {appliance_id!r}") from None


@dataclass(frozen=True)
class DeadlineConstraint:
    """Latest-completion bound: the run must vacate slot finish_by_slot and later."""

    appliance_id: str
    finish_by_slot: int
    origin: str = "default"  # "default", "calendar" or "user"

    def satisfied_by(self, start_slot: int, duration_slots: int) -> bool:
        return start_slot + duration_slots <= self.finish_by_slot


@dataclass(frozen=True)
class BinarySchedule:
    """One appliance's committed 96-slot on/off plan with cost provenance."""

    appliance_id: str
    states: tuple[int, ...]
    start_slot: int
    duration_slots: int
    price_sum: float  # EUR/MWh summed over the occupied slots
    estimated_cost_eur: float
    reasoning: str = ""

    @property
    def end_slot(self) -> int:
        """First slot after the run (exclusive)."""
        return self.start_slot + self.duration_slots


def estimated_cost_eur(price_sum: float, power_kw: float) -> float:
    """Energy cost in EUR for a run whose occupied slots sum to price_sum EUR/MWh."""
    return price_sum * power_kw * SLOT_HOURS / 1000.0


def schedule_from_start(
    spec: ApplianceSpec,
    start: int,
    prices: PriceCurve,
    reasoning: str = "",
) -> BinarySchedule:
    """Build the binary schedule for a continuous run of spec starting at start."""
    if not 0 <= start < SLOTS_PER_DAY:
        raise SlotRangeError(f"start slot must be in [0, 95], got {start}")
    if start > spec.max_start_slot:
        raise InfeasibleStartError(spec.id, start, spec.max_start_slot)
    states = tuple(
        1 if start <= k < start + spec.duration_slots else 0
        for k in range(SLOTS_PER_DAY)
    )
    price_sum = sum(prices.prices[start : start + spec.duration_slots])
    return BinarySchedule(
        appliance_id=spec.id,
        states=states,
        start_slot=start,
        duration_slots=spec.duration_slots,
        price_sum=price_sum,
        estimated_cost_eur=estimated_cost_eur(price_sum, spec.power_kw),
        reasoning=reasoning,
    )


def validate_schedule(schedule: BinarySchedule, deadline: DeadlineConstraint) -> bool:
    """True iff the schedule finishes before the deadline's cut-off slot."""
    if schedule.appliance_id != deadline.appliance_id:
        raise ApplianceMismatchError(
            f"schedule is for {schedule.appliance_id}, "
            f"constraint is for {deadline.appliance_id}"
        )
    return deadline.satisfied_by(schedule.start_slot, schedule.duration_slots)


def schedule_to_json(schedule: BinarySchedule, market_date: date) -> dict:
    """Wire form of a committed schedule (one file per appliance per run)."""
    return {
        "appliance_id": schedule.appliance_id,
        "market_date": market_date.isoformat(),
        "start_slot": schedule.start_slot,
        "duration_slots": schedule.duration_slots,
        "states": list(schedule.states),
        "price_sum_eur_mwh": schedule.price_sum,
        "estimated_cost_eur": schedule.estimated_cost_eur,
        "reasoning": schedule.reasoning,
    }


def schedule_from_json(doc: dict) -> BinarySchedule:
    return BinarySchedule(
        appliance_id=doc["appliance_id"],
        states=tuple(doc["states"]),
        start_slot=doc["start_slot"],
        duration_slots=doc["duration_slots"],
        price_sum=doc["price_sum_eur_mwh"],
        estimated_cost_eur=doc["estimated_cost_eur"],
        reasoning=doc.get("reasoning", ""),
    )


def schedule_filename(run_id: str, appliance_id: str) -> str:
    return f"{run_id}_{appliance_id}.json"
