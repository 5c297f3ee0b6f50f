"""Scenario runner: repeated orchestrations measured against the exact optimizer."""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Callable, Optional

from .agents import Providers, run_orchestration
from .agents.calendar import InfeasibleDeadlineError, derive_calendar_deadline
from .agents.trace import OUTCOME_FINISHED, RunTrace
from .domain import (
    APPLIANCES,
    DISHWASHER,
    EV_CHARGER,
    WASHING_MACHINE,
    DeadlineConstraint,
    PriceCurve,
)
from .grammar import CALCULATE_WINDOW_SUMS
from .llm.base import Backend
from .optimizer import most_expensive_window, optimal_start
from .prompts import STAGE_EXPLICIT, PromptLibrary
from .providers import FixtureCalendarProvider, FixturePriceProvider
from .security.gateway import wrap_privileged

SCENARIO_SINGLE = "single_appliance"
SCENARIO_MULTI = "multi_appliance"
SCENARIO_ANALYTICAL = "analytical_query"
SCENARIOS = (SCENARIO_SINGLE, SCENARIO_MULTI, SCENARIO_ANALYTICAL)

DEFAULT_REQUESTS = {
    SCENARIO_SINGLE: "Schedule my washing machine at the cheapest time",
    SCENARIO_MULTI: "Schedule all flexible loads for tomorrow",
    SCENARIO_ANALYTICAL: "What is the most expensive 3-hour window today?",
}

SCENARIO_APPLIANCES = {
    SCENARIO_SINGLE: (WASHING_MACHINE,),
    SCENARIO_MULTI: (WASHING_MACHINE, DISHWASHER, EV_CHARGER),
    SCENARIO_ANALYTICAL: (),
}

_FIRST_SLOT_RE = re.compile(r"slot\s+(\d+)", re.IGNORECASE)


class ScenarioError(Exception):
    """Fixture resolution or scenario configuration failure."""


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    request: str
    stage: str = STAGE_EXPLICIT
    repetitions: int = 5
    price_fixture: Path = Path("fixtures/at_2025-10-15.json")
    calendar_fixture: Optional[Path] = None
    zone: str = "AT"

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ScenarioError(f"unknown scenario {self.name!r}")
        if self.repetitions < 1:
            raise ScenarioError("repetitions must be >= 1")


@dataclass
class ScenarioReport:
    name: str
    stage: str
    repetitions: int
    success_count: int = 0
    optimal: dict[str, tuple[int, int]] = field(default_factory=dict)  # id -> (optimal, attempts)
    tool_used_count: int = 0
    correct_count: int = 0
    avg_iterations: float = 0.0
    avg_tokens: float = 0.0
    avg_wall_ms: float = 0.0
    oracle_starts: dict[str, int] = field(default_factory=dict)
    oracle_max_window_start: int = 0
    runs: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "stage": self.stage,
            "repetitions": self.repetitions,
            "success_count": self.success_count,
            "optimal": {k: list(v) for k, v in self.optimal.items()},
            "tool_used_count": self.tool_used_count,
            "correct_count": self.correct_count,
            "avg_iterations": self.avg_iterations,
            "avg_tokens": self.avg_tokens,
            "avg_wall_ms": self.avg_wall_ms,
            "oracle_starts": dict(self.oracle_starts),
            "oracle_max_window_start": self.oracle_max_window_start,
            "runs": list(self.runs),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ScenarioReport":
        return cls(
            name=doc["name"],
            stage=doc["stage"],
            repetitions=doc["repetitions"],
            success_count=doc["success_count"],
            optimal={k: tuple(v) for k, v in doc["optimal"].items()},
            tool_used_count=doc["tool_used_count"],
            correct_count=doc["correct_count"],
            avg_iterations=doc["avg_iterations"],
            avg_tokens=doc["avg_tokens"],
            avg_wall_ms=doc["avg_wall_ms"],
            oracle_starts=doc["oracle_starts"],
            oracle_max_window_start=doc["oracle_max_window_start"],
            runs=doc.get("runs", []),
        )


def load_price_fixture(path: Path) -> PriceCurve:
    provider = FixturePriceProvider(Path(path))
    # Single-file fixtures carry their own date; the probe date is ignored.
    return provider.fetch_prices(datetime.now().date())


def scenario_deadlines(
    curve: PriceCurve, calendar_fixture: Optional[Path]
) -> dict[str, DeadlineConstraint]:
    """The EV deadline the agents will be held to on this fixture."""
    events = []
    if calendar_fixture is not None:
        day_start = datetime.combine(curve.market_date, datetime.min.time())
        events = FixtureCalendarProvider(Path(calendar_fixture)).fetch_events(
            day_start, day_start + timedelta(days=1)
        )
    try:
        constraint = derive_calendar_deadline(events, curve.market_date)
    except InfeasibleDeadlineError:
        return {}
    return {EV_CHARGER: constraint}


def reported_window_start(summary: str) -> Optional[int]:
    m = _FIRST_SLOT_RE.search(summary or "")
    return int(m.group(1)) if m else None


def run_scenario(
    spec: ScenarioSpec,
    backend: Backend,
    *,
    library: Optional[PromptLibrary] = None,
    clock: Callable[[], float] = time.monotonic,
    on_trace: Optional[Callable[[RunTrace], None]] = None,
) -> ScenarioReport:
    """Execute the scenario `repetitions` times and score it against the oracle."""
    library = library or PromptLibrary()
    price_path = Path(spec.price_fixture)
    if not price_path.exists():
        raise ScenarioError(f"price fixture not found: {price_path}")
    if spec.calendar_fixture is not None and not Path(spec.calendar_fixture).exists():
        raise ScenarioError(f"calendar fixture not found: {spec.calendar_fixture}")
    curve = load_price_fixture(price_path)
    deadlines = scenario_deadlines(curve, spec.calendar_fixture)

    oracle_starts = {}
    for appliance_id in SCENARIO_APPLIANCES[spec.name]:
        start, _ = optimal_start(curve, APPLIANCES[appliance_id], deadlines.get(appliance_id))
        oracle_starts[appliance_id] = start
    max_start, _ = most_expensive_window(curve, 12)

    report = ScenarioReport(
        name=spec.name,
        stage=spec.stage,
        repetitions=spec.repetitions,
        oracle_starts=oracle_starts,
        oracle_max_window_start=max_start,
        optimal={a: (0, 0) for a in SCENARIO_APPLIANCES[spec.name]},
    )

    providers = Providers(
        prices=FixturePriceProvider(price_path),
        calendar=(
            FixtureCalendarProvider(Path(spec.calendar_fixture))
            if spec.calendar_fixture is not None
            else None
        ),
        market_date=curve.market_date,
        zone=spec.zone,
    )

    iterations_total = 0
    tokens_total = 0
    wall_total = 0
    for rep in range(spec.repetitions):
        trace = run_orchestration(
            wrap_privileged(spec.request),
            spec.stage,
            backend,
            providers,
            library=library,
            run_id=f"{spec.name}-{spec.stage}-{rep}",
            scenario=spec.name,
            clock=clock,
        )
        if on_trace:
            on_trace(trace)
        iterations_total += trace.iteration_count
        tokens_total += trace.total_tokens
        wall_total += trace.wall_ms

        committed = {s.appliance_id: s.start_slot for s in trace.schedules}
        for appliance_id in SCENARIO_APPLIANCES[spec.name]:
            optimal, attempts = report.optimal[appliance_id]
            if appliance_id in committed:
                attempts += 1
                if committed[appliance_id] == oracle_starts[appliance_id]:
                    optimal += 1
            report.optimal[appliance_id] = (optimal, attempts)

        tool_used = any(i.action_verb == CALCULATE_WINDOW_SUMS for i in trace.iterations)
        reported = reported_window_start(trace.summary)
        correct = trace.outcome == OUTCOME_FINISHED and reported == max_start
        if spec.name == SCENARIO_ANALYTICAL:
            report.tool_used_count += 1 if tool_used else 0
            report.correct_count += 1 if correct else 0
            success = correct
        else:
            wanted = SCENARIO_APPLIANCES[spec.name]
            success = trace.outcome == OUTCOME_FINISHED and all(
                a in committed for a in wanted
            )
        report.success_count += 1 if success else 0
        report.runs.append(
            {
                "run_id": trace.run_id,
                "outcome": trace.outcome,
                "iterations": trace.iteration_count,
                "total_tokens": trace.total_tokens,
                "wall_ms": trace.wall_ms,
                "committed": committed,
                "success": success,
                "tool_used": tool_used,
                "reported_window_start": reported,
                "summary": trace.summary,
            }
        )

    n = spec.repetitions
    report.avg_iterations = iterations_total / n
    report.avg_tokens = tokens_total / n
    report.avg_wall_ms = wall_total / n
    return report


def _ratio(numerator: int, denominator: int) -> str:
    if denominator == 0:
        return "0/0 (---)"
    return f"{numerator}/{denominator} ({100 * numerator / denominator:.0f}%)"


REPORT_COLUMNS = (
    "Scenario", "Stage", "Success", "WM Optimal", "DW Optimal", "EV Optimal",
    "Tool Used", "Correct", "Avg Iter.", "Avg Tokens", "Avg Time (s)",
)


def render_report_table(reports: list[ScenarioReport]) -> str:
    rows = [REPORT_COLUMNS]
    for r in reports:
        analytical = r.name == SCENARIO_ANALYTICAL
        cells = (
            r.name,
            r.stage,
            _ratio(r.success_count, r.repetitions),
            _ratio(*r.optimal.get(WASHING_MACHINE, (0, 0))),
            _ratio(*r.optimal.get(DISHWASHER, (0, 0))),
            _ratio(*r.optimal.get(EV_CHARGER, (0, 0))),
            _ratio(r.tool_used_count, r.repetitions) if analytical else "---",
            _ratio(r.correct_count, r.repetitions) if analytical else "---",
            f"{r.avg_iterations:.1f}",
            f"{r.avg_tokens:,.0f}",
            f"{r.avg_wall_ms / 1000:.1f}",
        )
        rows.append(cells)
    widths = [max(len(row[i]) for row in rows) for i in range(len(REPORT_COLUMNS))]
    lines = []
    for idx, row in enumerate(rows):
        lines.append(" | ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
        if idx == 0:
            lines.append("-+-".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def emit_report(reports: list[ScenarioReport], out_dir: Path) -> tuple[Path, Path]:
    """Write the plain-text table and its machine-readable JSON twin."""
    if not reports:
        raise ValueError("emit_report requires at least one report")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        text_path = out_dir / "report.txt"
        json_path = out_dir / "report.json"
        text_path.write_text(render_report_table(reports), encoding="utf-8")
        json_path.write_text(
            json.dumps([r.to_json() for r in reports], indent=1), encoding="utf-8"
        )
    except OSError as exc:
        raise OSError(f"cannot write report to {out_dir}: {exc}") from exc
    return text_path, json_path


def read_report(json_path: Path) -> list[ScenarioReport]:
    docs = json.loads(Path(json_path).read_text(encoding="utf-8"))
    return [ScenarioReport.from_json(doc) for doc in docs]
