"""Text protocol between the orchestrator LLM and the tool runtime.

Actions are single lines of the form::

    ACTION: VERB | key=value | key=value

Values may contain spaces and ``=`` but never ``|`` (the delimiter).
Specialist agents reply with structured recommendation blocks that are
extracted tolerantly; the last structured block wins when a model
restates itself.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .domain import (
    ApplianceSpec,
    BinarySchedule,
    DeadlineConstraint,
    PriceCurve,
    slot_to_time,
)
from .optimizer import WindowSums

GET_PRICES = "GET_PRICES"
GET_CALENDAR_CONSTRAINT = "GET_CALENDAR_CONSTRAINT"
CALCULATE_WINDOW_SUMS = "CALCULATE_WINDOW_SUMS"
CALL_AGENT = "CALL_AGENT"
SCHEDULE = "SCHEDULE"
FINISH = "FINISH"

REQUIRED_ARGS: dict[str, tuple[str, ...]] = {
    GET_PRICES: (),
    GET_CALENDAR_CONSTRAINT: (),
    CALCULATE_WINDOW_SUMS: ("window_size",),
    CALL_AGENT: ("agent_name", "user_request"),
    SCHEDULE: ("appliance_id", "start_slot", "duration_slots", "reasoning"),
    FINISH: ("summary",),
}

INT_ARGS = frozenset({"window_size", "start_slot", "duration_slots"})

_ACTION_LINE = re.compile(r"^\s*ACTION:\s*(.*)$")


class ActionParseError(Exception):
    """Base for all action-grammar failures; the loop feeds these back as observations."""


class NoActionError(ActionParseError):
    pass


class UnknownActionError(ActionParseError):
    pass


class BadArgsError(ActionParseError):
    pass


class UnparseableRecommendationError(Exception):
    """Specialist output contained no structured recommendation block."""


@dataclass(frozen=True)
class ActionCommand:
    verb: str
    args: dict[str, str] = field(default_factory=dict)
    raw_line: str = field(default="", compare=False)
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def int_arg(self, key: str) -> int:
        return int(self.args[key])


def parse_action(llm_output: str) -> ActionCommand:
    """First ACTION line of the output, validated against the verb's contract.

    Later ACTION lines are ignored but reported via the returned command's
    warnings (the model violated the one-action rule).
    """
    if not isinstance(llm_output, str):
        raise NoActionError("no ACTION line found in model output")
    action_lines = []
    for line in llm_output.splitlines():
        m = _ACTION_LINE.match(line)
        if m:
            action_lines.append((line, m.group(1)))
    if not action_lines:
        raise NoActionError("no ACTION line found in model output")

    raw_line, body = action_lines[0]
    warnings = []
    if len(action_lines) > 1:
        warnings.append(
            f"protocol violation: {len(action_lines)} ACTION lines in one "
            "completion; executing the first, ignoring the rest"
        )

    segments = body.split("|")
    verb = segments[0].strip()
    if verb not in REQUIRED_ARGS:
        raise UnknownActionError(f"unknown action verb: {verb!r}")

    args: dict[str, str] = {}
    for segment in segments[1:]:
        segment = segment.strip()
        if not segment:
            continue
        if "=" not in segment:
            raise BadArgsError(f"malformed argument (expected key=value): {segment!r}")
        key, value = segment.split("=", 1)
        args[key.strip()] = value

    for required in REQUIRED_ARGS[verb]:
        if required not in args or not args[required].strip():
            raise BadArgsError(f"{verb} is missing required argument {required!r}")
    for key in INT_ARGS & args.keys():
        try:
            int(args[key].strip())
        except ValueError:
            raise BadArgsError(
                f"argument {key!r} must be a base-10 integer, got {args[key]!r}"
            ) from None
        args[key] = args[key].strip()

    return ActionCommand(verb=verb, args=args, raw_line=raw_line, warnings=tuple(warnings))


def serialize_action(cmd: ActionCommand) -> str:
    """Canonical single-line form; ``|`` inside values is sanitized to ``/``."""
    parts = [f"ACTION: {cmd.verb}"]
    for key, value in cmd.args.items():
        parts.append(f"{key}={str(value).replace('|', '/')}")
    return " | ".join(parts)


@dataclass(frozen=True)
class AgentRecommendation:
    start_slot: int
    duration_slots: int
    price_sum: Optional[float]
    reasoning: str
    source_agent: str
    warnings: tuple[str, ...] = field(default=(), compare=False)


_SLOT_RE = re.compile(
    r"(?:recommended\s+timeslot|start\s+timeslot)\s*:?\s*\**\s*slot\s+(\d+)",
    re.IGNORECASE,
)
_SUM_RE = re.compile(r"sum\s+of\s+prices\s*:?\s*\**\s*(-?\d+(?:\.\d+)?)", re.IGNORECASE)
_DURATION_RE = re.compile(r"duration\s*:?\s*\**\s*(\d+)\s*slots", re.IGNORECASE)
_REASON_RE = re.compile(r"reasoning\s*:?\s*(.+)", re.IGNORECASE)


def parse_recommendation(agent_output: str, spec: ApplianceSpec, source_agent: str = "") -> AgentRecommendation:
    """Extract the last structured recommendation block from specialist output.

    Handles both reply styles: the inline ``Recommended Timeslot: Slot X``
    form and the bulleted ``* Start timeslot: Slot X`` report form.
    """
    slots = _SLOT_RE.findall(agent_output or "")
    if not slots:
        raise UnparseableRecommendationError(
            f"no recommendation block found in output of {source_agent or spec.id}"
        )
    start_slot = int(slots[-1])
    warnings = []

    duration = spec.duration_slots
    durations = _DURATION_RE.findall(agent_output)
    if durations and int(durations[-1]) != spec.duration_slots:
        warnings.append(
            f"stated duration {durations[-1]} slots conflicts with the fixed "
            f"{spec.id} duration ({spec.duration_slots} slots); using the fixed value"
        )

    sums = _SUM_RE.findall(agent_output)
    price_sum = float(sums[-1]) if sums else None

    reasons = _REASON_RE.findall(agent_output)
    reasoning = reasons[-1].strip() if reasons else ""

    if start_slot > spec.max_start_slot:
        warnings.append(
            f"recommended start {start_slot} exceeds {spec.id} latest start "
            f"{spec.max_start_slot}"
        )

    return AgentRecommendation(
        start_slot=start_slot,
        duration_slots=duration,
        price_sum=price_sum,
        reasoning=reasoning,
        source_agent=source_agent or spec.id,
        warnings=tuple(warnings),
    )


def _fmt_floats(values) -> str:
    return json.dumps(list(values))


def render_prices_observation(curve: PriceCurve) -> str:
    prices = curve.prices
    lo = min(range(len(prices)), key=prices.__getitem__)
    hi = max(range(len(prices)), key=prices.__getitem__)
    return (
        f"Observation: prices loaded for {curve.market_date.isoformat()} "
        f"(source={curve.source}), 96 slots, unit EUR/MWh, "
        f"min={prices[lo]} @ slot {lo}, max={prices[hi]} @ slot {hi}\n"
        f"prices={_fmt_floats(prices)}"
    )


def render_window_sums_observation(ws: WindowSums) -> str:
    return (
        f"Observation: window_size={ws.window_size} "
        f"min_window_index={ws.min_window_index} min_sum={ws.min_sum} "
        f"max_window_index={ws.max_window_index} max_sum={ws.max_sum}\n"
        f"sums={_fmt_floats(ws.sums)}"
    )


def render_calendar_observation(events, constraint: Optional[DeadlineConstraint]) -> str:
    if events:
        lines = "; ".join(
            f"{e.title} {e.start.isoformat()} to {e.end.isoformat()}" for e in events
        )
        head = f"Observation: {len(events)} calendar event(s): {lines}."
    else:
        head = "Observation: no calendar events in the scheduling window."
    if constraint is not None:
        head += (
            f" EV charging must finish by slot {constraint.finish_by_slot} "
            f"({slot_to_time(constraint.finish_by_slot)}, origin={constraint.origin})."
        )
    return head


def render_agent_observation(agent_name: str, recommendation_text: str) -> str:
    return f"Observation: response from {agent_name}:\n{recommendation_text}"


def render_schedule_observation(schedule: BinarySchedule) -> str:
    end = schedule.end_slot
    end_time = "24:00" if end >= 96 else slot_to_time(end)
    return (
        f"Observation: scheduled {schedule.appliance_id} at slots "
        f"{schedule.start_slot}-{end - 1} "
        f"({slot_to_time(schedule.start_slot)}-{end_time}), "
        f"price_sum={schedule.price_sum:.2f} EUR/MWh, "
        f"estimated_cost={schedule.estimated_cost_eur:.4f} EUR"
    )


def render_error_observation(error: Union[str, Exception]) -> str:
    return f"Observation: ERROR: {error}"


def render_observation(result) -> str:
    """Render any tool result or error as a single observation block."""
    if isinstance(result, PriceCurve):
        return render_prices_observation(result)
    if isinstance(result, WindowSums):
        return render_window_sums_observation(result)
    if isinstance(result, BinarySchedule):
        return render_schedule_observation(result)
    if isinstance(result, Exception):
        return render_error_observation(result)
    return f"Observation: {result}"
