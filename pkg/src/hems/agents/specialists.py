"""Single-turn specialist agents: one tool cycle, one structured recommendation."""

from __future__ import annotations

import json
import re
from typing import Optional

from ..domain import DeadlineConstraint, PriceCurve, appliance, slot_to_time
from ..grammar import (
    AgentRecommendation,
    UnparseableRecommendationError,
    parse_recommendation,
    render_window_sums_observation,
)
from ..llm.base import Backend, ChatRequest, ChatResponse, Message
from ..optimizer import calculate_window_sums
from ..prompts import AGENT_NAMES, PromptLibrary

_WINDOW_SIZE_RE = re.compile(r"window_size\s*=\s*(\d+)")

RE_ASK = (
    "Observation: ERROR: your reply had no structured recommendation block. "
    "End your response with the required format, including "
    "'Recommended Timeslot: Slot X (HH:MM)'."
)


class SpecialistFailureError(Exception):
    """The specialist produced no parseable recommendation after one re-ask."""


def build_specialist_task(
    prices: PriceCurve,
    constraint: Optional[DeadlineConstraint],
    user_request: str,
) -> str:
    lines = [
        f"Electricity prices for {prices.market_date.isoformat()} "
        "(96 slots of 15 minutes, EUR/MWh):",
        f"prices={json.dumps(list(prices.prices))}",
    ]
    if constraint is not None:
        lines.append(
            f"Constraint: the run must finish by slot {constraint.finish_by_slot} "
            f"({slot_to_time(constraint.finish_by_slot)}, origin={constraint.origin})."
        )
    lines.append(f"User request: {user_request}")
    return "\n".join(lines)


def run_specialist(
    agent_name: str,
    prices: PriceCurve,
    constraint: Optional[DeadlineConstraint],
    user_request: str,
    backend: Backend,
    library: PromptLibrary,
    model_id: str = "",
) -> tuple[AgentRecommendation, str, list[ChatResponse]]:
    """Run one specialist cycle and return (recommendation, final text, responses).

    The cycle is: prompt the agent, execute its single window-sum tool call
    with the appliance's fixed window size, feed the result back, and parse
    the structured recommendation (re-asking once on format failure).
    """
    if agent_name not in AGENT_NAMES:
        raise SpecialistFailureError(f"unknown specialist agent: {agent_name!r}")
    spec = appliance(AGENT_NAMES[agent_name])
    system = library.specialist(agent_name)
    task = build_specialist_task(prices, constraint, user_request)
    messages = [Message("user", task)]
    responses: list[ChatResponse] = []

    first = backend.complete(ChatRequest(model_id, system, tuple(messages)))
    responses.append(first)
    warnings = []
    m = _WINDOW_SIZE_RE.search(first.content)
    if m and int(m.group(1)) != spec.duration_slots:
        warnings.append(
            f"{agent_name} asked for window_size={m.group(1)}; executing the "
            f"spec size {spec.duration_slots}"
        )
    window = calculate_window_sums(prices, spec.duration_slots)
    messages.append(Message("assistant", first.content))
    messages.append(Message("user", render_window_sums_observation(window)))

    final = backend.complete(ChatRequest(model_id, system, tuple(messages)))
    responses.append(final)
    try:
        recommendation = parse_recommendation(final.content, spec, agent_name)
    except UnparseableRecommendationError:
        messages.append(Message("assistant", final.content))
        messages.append(Message("user", RE_ASK))
        retry = backend.complete(ChatRequest(model_id, system, tuple(messages)))
        responses.append(retry)
        try:
            recommendation = parse_recommendation(retry.content, spec, agent_name)
            final = retry
        except UnparseableRecommendationError as exc:
            raise SpecialistFailureError(str(exc)) from exc

    if constraint is not None and not constraint.satisfied_by(
        recommendation.start_slot, recommendation.duration_slots
    ):
        warnings.append(
            f"recommendation violates the deadline "
            f"(finish_by_slot={constraint.finish_by_slot}); it will not be committed"
        )
    if warnings:
        recommendation = AgentRecommendation(
            start_slot=recommendation.start_slot,
            duration_slots=recommendation.duration_slots,
            price_sum=recommendation.price_sum,
            reasoning=recommendation.reasoning,
            source_agent=recommendation.source_agent,
            warnings=recommendation.warnings + tuple(warnings),
        )
    return recommendation, final.content, responses
