"""The orchestrator ReAct loop and its six-tool dispatch."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from typing import Callable, Optional

from ..domain import (
    EV_CHARGER,
    EV_DEFAULT_FINISH_BY_SLOT,
    BinarySchedule,
    DeadlineConstraint,
    InfeasibleStartError,
    PriceCurve,
    appliance,
    schedule_from_start,
)
from ..grammar import (
    ActionCommand,
    ActionParseError,
    CALCULATE_WINDOW_SUMS,
    CALL_AGENT,
    FINISH,
    GET_CALENDAR_CONSTRAINT,
    GET_PRICES,
    SCHEDULE,
    parse_action,
    render_agent_observation,
    render_calendar_observation,
    render_error_observation,
    render_prices_observation,
    render_schedule_observation,
    render_window_sums_observation,
)
from ..llm.base import Backend, BackendError, ChatRequest, ChatResponse, Message
from ..optimizer import WindowSizeError, calculate_window_sums
from ..prompts import AGENT_NAMES, PromptLibrary
from ..providers import CalendarProvider, PriceProvider, ProviderError
from .calendar import InfeasibleDeadlineError, derive_calendar_deadline
from .specialists import SpecialistFailureError, run_specialist
from .trace import (
    DEFAULT_ITERATION_CAP,
    Iteration,
    OUTCOME_ABORTED,
    OUTCOME_FINISHED,
    OUTCOME_ITERATION_CAP,
    RunTrace,
)


@dataclass
class Providers:
    """Data sources one orchestration run draws on."""

    prices: PriceProvider
    calendar: Optional[CalendarProvider]
    market_date: date
    zone: str = "AT"


@dataclass
class SessionContext:
    """Mutable per-run state shared by the tool dispatchers."""

    prices: Optional[PriceCurve] = None
    price_fetches: int = 0
    calendar_events: list = field(default_factory=list)
    ev_constraint: Optional[DeadlineConstraint] = None
    ev_deadline_error: Optional[str] = None
    scheduled: dict[str, BinarySchedule] = field(default_factory=dict)


@dataclass
class DispatchResult:
    observation: str
    schedule: Optional[BinarySchedule] = None
    finished: bool = False
    summary: str = ""
    extra_responses: list[ChatResponse] = field(default_factory=list)


def _ensure_prices(ctx: SessionContext, providers: Providers) -> Optional[str]:
    """Fetch the price curve once per session; later calls hit the cache."""
    if ctx.prices is None:
        ctx.prices = providers.prices.fetch_prices(providers.market_date, providers.zone)
        ctx.price_fetches += 1
    return None


def dispatch(
    cmd: ActionCommand,
    ctx: SessionContext,
    providers: Providers,
    backend: Backend,
    library: PromptLibrary,
    model_id: str = "",
) -> DispatchResult:
    """Execute one validated action; tool failures become error observations."""
    if cmd.verb == GET_PRICES:
        try:
            _ensure_prices(ctx, providers)
        except ProviderError as exc:
            return DispatchResult(render_error_observation(exc))
        return DispatchResult(render_prices_observation(ctx.prices))

    if cmd.verb == GET_CALENDAR_CONSTRAINT:
        day_start = datetime.combine(providers.market_date, datetime.min.time())
        events = []
        if providers.calendar is not None:
            try:
                events = providers.calendar.fetch_events(
                    day_start, day_start + timedelta(days=1)
                )
            except ProviderError as exc:
                return DispatchResult(render_error_observation(exc))
        ctx.calendar_events = events
        try:
            ctx.ev_constraint = derive_calendar_deadline(events, providers.market_date)
        except InfeasibleDeadlineError as exc:
            ctx.ev_deadline_error = str(exc)
            return DispatchResult(render_error_observation(exc))
        return DispatchResult(render_calendar_observation(events, ctx.ev_constraint))

    if cmd.verb == CALCULATE_WINDOW_SUMS:
        if ctx.prices is None:
            return DispatchResult(
                render_error_observation("prices not loaded yet; run GET_PRICES first")
            )
        try:
            window = calculate_window_sums(ctx.prices, cmd.int_arg("window_size"))
        except WindowSizeError as exc:
            return DispatchResult(render_error_observation(exc))
        return DispatchResult(render_window_sums_observation(window))

    if cmd.verb == CALL_AGENT:
        agent_name = cmd.args["agent_name"].strip()
        if agent_name not in AGENT_NAMES:
            return DispatchResult(
                render_error_observation(f"unknown agent_name {agent_name!r}")
            )
        if ctx.prices is None:
            return DispatchResult(
                render_error_observation("prices not loaded yet; run GET_PRICES first")
            )
        constraint = None
        if AGENT_NAMES[agent_name] == EV_CHARGER:
            if ctx.ev_deadline_error:
                return DispatchResult(render_error_observation(ctx.ev_deadline_error))
            constraint = ctx.ev_constraint
        try:
            _rec, final_text, responses = run_specialist(
                agent_name,
                ctx.prices,
                constraint,
                cmd.args["user_request"].strip(),
                backend,
                library,
                model_id=model_id,
            )
        except SpecialistFailureError as exc:
            return DispatchResult(render_error_observation(exc))
        return DispatchResult(
            render_agent_observation(agent_name, final_text),
            extra_responses=responses,
        )

    if cmd.verb == SCHEDULE:
        appliance_id = cmd.args["appliance_id"].strip()
        try:
            spec = appliance(appliance_id)
        except Exception as exc:
            return DispatchResult(render_error_observation(exc))
        if appliance_id in ctx.scheduled:
            return DispatchResult(
                render_error_observation(
                    f"duplicate_schedule: {appliance_id} is already scheduled this run"
                )
            )
        if ctx.prices is None:
            return DispatchResult(
                render_error_observation("prices not loaded yet; run GET_PRICES first")
            )
        duration = cmd.int_arg("duration_slots")
        if duration != spec.duration_slots:
            return DispatchResult(
                render_error_observation(
                    f"{appliance_id} runs for exactly {spec.duration_slots} slots, "
                    f"not {duration}"
                )
            )
        start = cmd.int_arg("start_slot")
        if appliance_id == EV_CHARGER:
            if ctx.ev_deadline_error:
                return DispatchResult(render_error_observation(ctx.ev_deadline_error))
            deadline = ctx.ev_constraint or DeadlineConstraint(
                EV_CHARGER, EV_DEFAULT_FINISH_BY_SLOT, "default"
            )
            if not deadline.satisfied_by(start, spec.duration_slots):
                return DispatchResult(
                    render_error_observation(
                        f"start_slot {start} misses the EV deadline "
                        f"(must finish by slot {deadline.finish_by_slot})"
                    )
                )
        try:
            schedule = schedule_from_start(
                spec, start, ctx.prices, cmd.args.get("reasoning", "")
            )
        except (InfeasibleStartError, Exception) as exc:
            return DispatchResult(render_error_observation(exc))
        ctx.scheduled[appliance_id] = schedule
        return DispatchResult(render_schedule_observation(schedule), schedule=schedule)

    if cmd.verb == FINISH:
        return DispatchResult("", finished=True, summary=cmd.args["summary"])

    return DispatchResult(render_error_observation(f"unhandled verb {cmd.verb}"))


def _extract_thought(content: str) -> str:
    lines = []
    for line in content.splitlines():
        if line.strip().startswith("ACTION:"):
            break
        lines.append(line)
    thought = "\n".join(lines).strip()
    if thought.lower().startswith("thought:"):
        thought = thought[len("thought:"):].strip()
    return thought


def run_orchestration(
    request: str,
    stage: str,
    backend: Backend,
    providers: Providers,
    *,
    library: Optional[PromptLibrary] = None,
    run_id: str = "run",
    scenario: str = "",
    model_id: str = "",
    iteration_cap: int = DEFAULT_ITERATION_CAP,
    clock: Callable[[], float] = time.monotonic,
    on_iteration: Optional[Callable[[Iteration], None]] = None,
    on_schedule: Optional[Callable[[BinarySchedule], None]] = None,
) -> RunTrace:
    """Drive the ReAct loop until FINISH, an error, or the iteration cap.

    ``request`` must already be gateway-validated and wrapped. Committed
    schedules are persisted via ``on_schedule`` at commit time, before any
    FINISH summary is produced.
    """
    library = library or PromptLibrary()
    system = library.orchestrator(stage)
    trace = RunTrace(
        run_id=run_id,
        request=request,
        scenario=scenario,
        stage=stage,
        market_date=providers.market_date,
    )
    ctx = SessionContext()
    conversation: list[Message] = [Message("user", request)]
    started = clock()

    for index in range(iteration_cap):
        chat_request = ChatRequest(model_id, system, tuple(conversation))
        try:
            response = backend.complete(chat_request)
        except BackendError as exc:
            trace.outcome = OUTCOME_ABORTED
            trace.summary = f"backend failure: {exc}"
            break

        prompt_tokens = response.prompt_tokens
        completion_tokens = response.completion_tokens
        warnings: tuple[str, ...] = ()
        thought = _extract_thought(response.content)

        try:
            cmd = parse_action(response.content)
        except ActionParseError as exc:
            observation = render_error_observation(exc)
            iteration = Iteration(
                index=index,
                thought=thought,
                action_verb="",
                action_args={},
                action_raw="",
                observation=observation,
                prompt_tokens=prompt_tokens,
                completion_tokens=completion_tokens,
                warnings=(f"{type(exc).__name__}: {exc}",),
            )
            trace.iterations.append(iteration)
            if on_iteration:
                on_iteration(iteration)
            conversation.append(Message("assistant", response.content))
            conversation.append(Message("user", observation))
            continue

        warnings = cmd.warnings
        result = dispatch(cmd, ctx, providers, backend, library, model_id=model_id)
        for extra in result.extra_responses:
            prompt_tokens += extra.prompt_tokens
            completion_tokens += extra.completion_tokens

        if result.schedule is not None:
            trace.schedules.append(result.schedule)
            if on_schedule:
                on_schedule(result.schedule)

        observation = result.observation
        iteration = Iteration(
            index=index,
            thought=thought,
            action_verb=cmd.verb,
            action_args=dict(cmd.args),
            action_raw=cmd.raw_line,
            observation=observation,
            prompt_tokens=prompt_tokens,
            completion_tokens=completion_tokens,
            warnings=warnings,
        )
        trace.iterations.append(iteration)
        if on_iteration:
            on_iteration(iteration)

        if result.finished:
            trace.outcome = OUTCOME_FINISHED
            trace.summary = result.summary
            break

        conversation.append(Message("assistant", response.content))
        conversation.append(Message("user", observation))
    else:
        trace.outcome = OUTCOME_ITERATION_CAP
        trace.summary = f"iteration cap {iteration_cap} reached without FINISH"

    trace.wall_ms = int((clock() - started) * 1000)
    return trace
