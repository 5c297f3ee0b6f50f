import json
from datetime import date
from pathlib import Path

import pytest

from hems.domain import PriceCurve
from hems.llm.base import ChatResponse
from hems.prompts import PromptLibrary

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"
TESTDATA = REPO_ROOT / "testdata"

FIGURE2_FIXTURE = FIXTURES / "at_2025-10-15.json"
OFFICE_CALENDAR = FIXTURES / "office_week.json"


@pytest.fixture(scope="session")
def figure2_path() -> Path:
    return FIGURE2_FIXTURE


@pytest.fixture(scope="session")
def office_calendar_path() -> Path:
    return OFFICE_CALENDAR


@pytest.fixture(scope="session")
def figure2_curve() -> PriceCurve:
    doc = json.loads(FIGURE2_FIXTURE.read_text())
    return PriceCurve(
        prices=tuple(doc["prices"]),
        market_date=date.fromisoformat(doc["market_date"]),
        source="fixture",
    )


@pytest.fixture
def constant_curve() -> PriceCurve:
    return PriceCurve(
        prices=tuple([100.0] * 96), market_date=date(2025, 10, 15), source="fixture"
    )


@pytest.fixture(scope="session")
def library() -> PromptLibrary:
    return PromptLibrary()


class CountingBackend:
    """Test double that records every completion request."""

    def __init__(self, inner=None, canned: str = ""):
        self.inner = inner
        self.canned = canned
        self.calls = 0
        self.requests = []
        self.responses = []

    def complete(self, request) -> ChatResponse:
        self.calls += 1
        self.requests.append(request)
        if self.inner is not None:
            response = self.inner.complete(request)
        else:
            response = ChatResponse(content=self.canned, prompt_tokens=1, completion_tokens=1)
        self.responses.append(response)
        return response


class StaticPriceProvider:
    """In-memory price provider; counts fetches for cache assertions."""

    def __init__(self, curve: PriceCurve):
        self.curve = curve
        self.fetches = 0

    def fetch_prices(self, market_date, zone="AT"):
        self.fetches += 1
        return self.curve


class StaticCalendarProvider:
    def __init__(self, events):
        self.events = list(events)

    def fetch_events(self, window_start, window_end):
        return sorted(
            (e for e in self.events if e.start < window_end and e.end > window_start),
            key=lambda e: e.start,
        )


@pytest.fixture
def counting_backend():
    return CountingBackend


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion."""
    reports = []
    for key in ("passed", "failed"):
        reports.extend(
            r for r in terminalreporter.stats.get(key, [])
            if "test_acceptance" in r.nodeid and r.when == "call"
        )
    if not reports:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for report in sorted(reports, key=lambda r: r.nodeid):
        name = report.nodeid.split("::")[-1]
        terminalreporter.write_line(
            f"{name}: {'PASS' if report.passed else 'FAIL'}"
        )
