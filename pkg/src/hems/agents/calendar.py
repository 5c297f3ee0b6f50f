"""EV charging deadline derivation from calendar events.

The rule is deterministic and authoritative regardless of backend: the
first event of the scheduling day, minus a 2-slot (30 minute) departure
buffer, capped by the 7am default. Model reasoning may read the raw events
but cannot loosen the committed constraint.
"""

from __future__ import annotations

from datetime import date, datetime
from typing import Optional, Sequence

from ..domain import (
    EV_CHARGER,
    EV_DEFAULT_FINISH_BY_SLOT,
    DeadlineConstraint,
    appliance,
)
from ..providers import CalendarEvent

DEPARTURE_BUFFER_SLOTS = 2  # leave 30 minutes before the event starts


class InfeasibleDeadlineError(Exception):
    """The derived deadline leaves no room for a full charging session."""


def event_start_slot(event_start: datetime, horizon: date) -> Optional[int]:
    """Slot index of the event start if it falls on the scheduling day."""
    if event_start.date() != horizon:
        return None
    return event_start.hour * 4 + event_start.minute // 15


def derive_calendar_deadline(
    events: Sequence[CalendarEvent], horizon: date
) -> DeadlineConstraint:
    """Deadline for the EV charger from the day's first event, if any.

    Raises InfeasibleDeadlineError when the event starts too early for a
    complete session to fit before it.
    """
    finish_by = EV_DEFAULT_FINISH_BY_SLOT
    origin = "default"
    binding_event: Optional[CalendarEvent] = None
    for event in sorted(events, key=lambda e: e.start):
        slot = event_start_slot(event.start, horizon)
        if slot is None:
            continue
        candidate = slot - DEPARTURE_BUFFER_SLOTS
        if candidate < finish_by:
            finish_by = candidate
            origin = "calendar"
            binding_event = event
        break  # only the first event of the day binds

    duration = appliance(EV_CHARGER).duration_slots
    if finish_by < duration:
        title = binding_event.title if binding_event else "(unknown)"
        when = binding_event.start.strftime("%H:%M") if binding_event else "?"
        raise InfeasibleDeadlineError(
            f"EV deadline infeasible: event {title!r} at {when} leaves no room "
            f"for a {duration}-slot charging session before departure"
        )
    return DeadlineConstraint(
        appliance_id=EV_CHARGER, finish_by_slot=finish_by, origin=origin
    )
