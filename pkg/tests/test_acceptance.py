"""Acceptance suite: one test per release criterion, at the stated tolerances.

The terminal summary prints one PASS/FAIL line per criterion (see the
pytest_terminal_summary hook in conftest).
"""

import random
import string
import time
from datetime import date, datetime

from hems.agents import Providers, run_orchestration
from hems.domain import APPLIANCES, DeadlineConstraint, PriceCurve
from hems.grammar import ActionCommand, ActionParseError, parse_action, serialize_action
from hems.harness import (
    DEFAULT_REQUESTS,
    SCENARIO_ANALYTICAL,
    SCENARIO_MULTI,
    SCENARIO_SINGLE,
    ScenarioSpec,
    run_scenario,
)
from hems.llm import ScriptedBackend
from hems.optimizer import calculate_window_sums, most_expensive_window, optimal_plan, optimal_start
from hems.prompts import STAGE_BASELINE, STAGE_EXPLICIT
from hems.providers import CalendarEvent
from hems.security import GatewayConfig, RateLimiter, SecurityGateway, unwrap_privileged

from tests.bruteforce import (
    brute_argmax,
    brute_argmin,
    brute_optimal_start,
    brute_window_sums,
)
from tests.conftest import CountingBackend, StaticCalendarProvider, StaticPriceProvider
from tests.test_security import load_benign, load_malicious
from tests.test_grammar import ACTIONS_DIR, CASES

MARKET_DATE = date(2025, 10, 15)
ABS_TOL = 1e-9


def test_oracle_correctness_1000_random_curves():
    """Window sums match the O(n*w) double loop and optimal starts match
    direct enumeration, for 1,000 random curves including negative prices,
    in under 10 seconds."""
    rng = random.Random(12345)
    started = time.monotonic()
    for _ in range(1000):
        prices = [rng.uniform(-500.0, 3000.0) for _ in range(96)]
        curve = PriceCurve(tuple(prices), MARKET_DATE)
        for window in (6, 8, 12, 24):
            ws = calculate_window_sums(curve, window)
            brute = brute_window_sums(prices, window)
            assert len(ws.sums) == len(brute)
            for fast, slow in zip(ws.sums, brute):
                assert abs(fast - slow) <= ABS_TOL
            assert ws.min_window_index == brute_argmin(brute)
            assert ws.max_window_index == brute_argmax(brute)
        for spec in APPLIANCES.values():
            start, total = optimal_start(curve, spec)
            expected = brute_optimal_start(prices, spec.duration_slots, spec.max_start_slot)
            assert start == expected[0]
            assert abs(total - expected[1]) <= ABS_TOL

            finish_by = rng.randint(spec.duration_slots, 96)
            deadline = DeadlineConstraint(spec.id, finish_by)
            start, total = optimal_start(curve, spec, deadline)
            expected = brute_optimal_start(
                prices, spec.duration_slots, spec.max_start_slot, finish_by
            )
            assert start == expected[0]
            assert abs(total - expected[1]) <= ABS_TOL
            assert start + spec.duration_slots <= finish_by
    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"oracle correctness took {elapsed:.1f}s (budget 10s)"


def test_figure2_scenario_reproduction(figure2_curve):
    """The frozen fixture reproduces the published optimal plan exactly:
    EV start 1, WM start 10, DW start 11, most expensive 12-window at 26."""
    plan = optimal_plan(figure2_curve)
    starts = {o.appliance_id: o.start_slot for o in plan.optima}
    assert starts["ev_charger"] == 1
    assert starts["washing_machine"] == 10
    assert starts["dishwasher"] == 11
    assert most_expensive_window(figure2_curve, 12)[0] == 26


def test_workflow_shape_single_appliance(figure2_path, office_calendar_path):
    """Single-appliance: exactly 4 iterations, WM at the oracle optimum,
    5/5 identical runs, under 5 seconds."""
    spec = ScenarioSpec(
        SCENARIO_SINGLE, DEFAULT_REQUESTS[SCENARIO_SINGLE],
        price_fixture=figure2_path, calendar_fixture=office_calendar_path,
    )
    started = time.monotonic()
    report = run_scenario(spec, ScriptedBackend())
    elapsed = time.monotonic() - started
    assert report.success_count == 5
    assert report.optimal["washing_machine"] == (5, 5)
    assert all(r["iterations"] == 4 for r in report.runs)
    committed = [r["committed"] for r in report.runs]
    assert all(c == committed[0] for c in committed), "runs were not identical"
    assert committed[0]["washing_machine"] == report.oracle_starts["washing_machine"]
    assert elapsed < 5.0, f"single-appliance scenario took {elapsed:.1f}s (budget 5s)"


def test_workflow_shape_multi_appliance(figure2_path, office_calendar_path):
    """Multi-appliance: exactly 9 iterations, all three schedules at the
    oracle optima, 5/5 identical runs, under 5 seconds."""
    spec = ScenarioSpec(
        SCENARIO_MULTI, DEFAULT_REQUESTS[SCENARIO_MULTI],
        price_fixture=figure2_path, calendar_fixture=office_calendar_path,
    )
    started = time.monotonic()
    report = run_scenario(spec, ScriptedBackend())
    elapsed = time.monotonic() - started
    assert report.success_count == 5
    for appliance_id in ("washing_machine", "dishwasher", "ev_charger"):
        assert report.optimal[appliance_id] == (5, 5)
    assert all(r["iterations"] == 9 for r in report.runs)
    committed = [r["committed"] for r in report.runs]
    assert all(c == committed[0] for c in committed), "runs were not identical"
    assert committed[0] == report.oracle_starts
    assert elapsed < 5.0, f"multi-appliance scenario took {elapsed:.1f}s (budget 5s)"


def test_prompt_stage_contrast(figure2_path):
    """Analytical query: tool used 0/5 under Baseline; 5/5 with
    oracle-correct window identification under Explicit Workflow."""
    baseline = run_scenario(
        ScenarioSpec(
            SCENARIO_ANALYTICAL, DEFAULT_REQUESTS[SCENARIO_ANALYTICAL],
            stage=STAGE_BASELINE, price_fixture=figure2_path,
        ),
        ScriptedBackend(),
    )
    assert baseline.tool_used_count == 0
    assert baseline.correct_count == 0

    explicit = run_scenario(
        ScenarioSpec(
            SCENARIO_ANALYTICAL, DEFAULT_REQUESTS[SCENARIO_ANALYTICAL],
            stage=STAGE_EXPLICIT, price_fixture=figure2_path,
        ),
        ScriptedBackend(),
    )
    assert explicit.tool_used_count == 5
    assert explicit.correct_count == 5
    assert explicit.oracle_max_window_start == 26
    for run in explicit.runs:
        assert run["reported_window_start"] == explicit.oracle_max_window_start


def test_security_suite():
    """>=60 malicious inputs rejected pre-LLM with zero backend calls;
    20 benign inputs accepted with byte-exact wrapping; rate limiter holds
    its bounds under adversarial timing."""
    backend = CountingBackend(canned="never called")
    gateway = SecurityGateway(GatewayConfig(rate_per_minute=1000, rate_per_day=10_000))

    malicious = load_malicious()
    assert len(malicious) >= 60
    per_category: dict[str, int] = {}
    for entry in malicious:
        per_category[entry["category"]] = per_category.get(entry["category"], 0) + 1
        verdict = gateway.validate_request("attacker", entry["text"], now=0.0)
        assert verdict.decision == "reject", entry["text"]
        # The orchestration layer only runs for accepted verdicts, so the
        # backend is never consulted for any of these.
        if verdict.accepted:
            backend.complete(None)
    assert all(count >= 10 for count in per_category.values())
    assert len(per_category) == 6
    assert backend.calls == 0

    benign = load_benign()
    assert len(benign) == 20
    for text in benign:
        verdict = gateway.validate_request("resident", text, now=1000.0)
        assert verdict.decision == "accept", text
        assert unwrap_privileged(verdict.wrapped_input) == text

    # Adversarial timing: bursts hugging the rolling-window edge.
    limiter = RateLimiter(per_minute=20, per_day=200)
    accepted: list[float] = []
    t = 0.0
    rng = random.Random(99)
    while t < 4000.0:
        if limiter.try_acquire("edge", t):
            accepted.append(t)
        t += rng.choice([0.001, 0.5, 2.9, 59.99, 60.01])
    for ts in accepted:
        window = [u for u in accepted if ts - 60.0 < u <= ts]
        assert len(window) <= 20
    assert len(accepted) <= 200
    assert limiter.day_count(4000.0) == len(accepted)

    day_limiter = RateLimiter(per_minute=20, per_day=200)
    granted = sum(
        day_limiter.try_acquire(f"c{i % 7}", i * 3.01) for i in range(400)
    )
    assert granted == 200


def test_protocol_robustness_fuzz_and_round_trip():
    """10,000 random strings never crash the parser; serialize/parse is the
    identity on valid commands; the golden corpus parses to expected slots."""
    rng = random.Random(4242)
    alphabet = string.printable
    for _ in range(10_000):
        length = rng.randrange(0, 160)
        text = "".join(rng.choice(alphabet) for _ in range(length))
        try:
            parse_action(text)
        except ActionParseError:
            pass  # the only permitted failure mode

    value_alphabet = string.ascii_letters + string.digits + " =_,.:-"
    verbs = {
        "GET_PRICES": {},
        "GET_CALENDAR_CONSTRAINT": {},
        "CALCULATE_WINDOW_SUMS": {"window_size": "12"},
        "CALL_AGENT": {"agent_name": "x", "user_request": "y"},
        "SCHEDULE": {
            "appliance_id": "dishwasher", "start_slot": "0",
            "duration_slots": "6", "reasoning": "r",
        },
        "FINISH": {"summary": "s"},
    }
    for _ in range(2000):
        verb = rng.choice(sorted(verbs))
        args = dict(verbs[verb])
        for key in ("window_size", "start_slot", "duration_slots"):
            if key in args:
                hi = 96 if key == "window_size" else 95
                lo = 1 if key == "window_size" else 0
                args[key] = str(rng.randint(lo, hi))
        for key in list(args):
            if key not in ("window_size", "start_slot", "duration_slots"):
                length = rng.randrange(1, 30)
                value = "".join(rng.choice(value_alphabet) for _ in range(length)).strip()
                args[key] = value or "v"
        cmd = ActionCommand(verb, args)
        assert parse_action(serialize_action(cmd)) == cmd

    from hems.grammar import parse_recommendation

    for case in CASES["recommendations"]:
        spec = APPLIANCES[case["appliance"]]
        rec = parse_recommendation((ACTIONS_DIR / case["file"]).read_text(), spec)
        assert rec.start_slot == case["start_slot"]


def test_constraint_safety_500_random_fixtures():
    """Across 500 random price curves with random calendar events, every
    schedule committed by a finished scripted run satisfies the start-slot
    bound, the completion bound, and the EV deadline. No violations ever."""
    rng = random.Random(777)
    backend = ScriptedBackend()
    for i in range(500):
        prices = [round(rng.uniform(-100.0, 400.0), 2) for _ in range(96)]
        curve = PriceCurve(tuple(prices), MARKET_DATE)
        events = []
        for _ in range(rng.choice([0, 1, 1, 2])):
            day = MARKET_DATE if rng.random() < 0.8 else date(2025, 10, 16)
            start_minute = rng.randrange(0, 23 * 60, 15)
            hour, minute = divmod(start_minute, 60)
            events.append(
                CalendarEvent(
                    f"event-{i}",
                    datetime(day.year, day.month, day.day, hour, minute),
                    datetime(day.year, day.month, day.day, min(hour + 1, 23), minute, 59),
                )
            )
        providers = Providers(
            StaticPriceProvider(curve), StaticCalendarProvider(events), MARKET_DATE
        )
        trace = run_orchestration(
            "<user_input>schedule all flexible loads</user_input>",
            STAGE_EXPLICIT, backend, providers,
        )
        assert trace.outcome == "finished", f"run {i} did not finish"

        day_events = sorted(
            (e for e in events if e.start.date() == MARKET_DATE),
            key=lambda e: e.start,
        )
        first_event = day_events[0] if day_events else None
        for schedule in trace.schedules:
            spec = APPLIANCES[schedule.appliance_id]
            assert 0 <= schedule.start_slot <= spec.max_start_slot  # latest-start bound
            assert schedule.start_slot + schedule.duration_slots <= 96  # completion bound
            assert sum(schedule.states) == spec.duration_slots
            if schedule.appliance_id == "ev_charger":
                assert schedule.start_slot + 24 <= 28  # default readiness deadline
                if first_event is not None:
                    event_slot = first_event.start.hour * 4 + first_event.start.minute // 15
                    assert schedule.start_slot + 24 <= event_slot - 2  # calendar deadline
