"""Day-ahead price and calendar ingestion: file fixtures plus live adapters.

Fixture and live paths return structurally identical values so the rest of
the system cannot tell them apart. Prices are normalized to EUR/MWh with
exactly 96 points per day; hourly market documents are upsampled by
repetition.
"""

from __future__ import annotations

import json
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta
from pathlib import Path
from typing import Optional, Protocol

import httpx

from .domain import SLOTS_PER_DAY, DomainError, PriceCurve

ENTSOE_ENDPOINT = "https://web-api.tp.entsoe.eu/api"
ZONE_EIC = {
    "AT": "10YAT-APG------L",
    "DE_LU": "10Y1001A1001A82H",
    "BE": "10YBE----------2",
    "NL": "10YNL----------L",
}


class ProviderError(Exception):
    """Base class for ingestion failures."""


class ProviderConfigError(ProviderError):
    """Missing token/credentials or unusable provider configuration."""


class ProviderParseError(ProviderError):
    """Upstream document could not be parsed."""


class ProviderDataError(ProviderError):
    """Document parsed but violates the 96-point contract."""


@dataclass(frozen=True)
class CalendarEvent:
    title: str
    start: datetime
    end: datetime

    def __post_init__(self):
        if self.start >= self.end:
            raise ProviderDataError(f"event {self.title!r}: start must precede end")


class PriceProvider(Protocol):
    def fetch_prices(self, market_date: date, zone: str = "AT") -> PriceCurve: ...


class CalendarProvider(Protocol):
    def fetch_events(self, window_start: datetime, window_end: datetime) -> list[CalendarEvent]: ...


def upsample_to_quarter_hours(values: list[float]) -> list[float]:
    """Repeat hourly points 4x; pass 96-point series through unchanged."""
    if len(values) == SLOTS_PER_DAY:
        return list(values)
    if len(values) == 24:
        return [v for v in values for _ in range(4)]
    raise ProviderDataError(
        f"expected 24 or 96 price points after normalization, got {len(values)}"
    )


class FixturePriceProvider:
    """Loads frozen price curves from JSON files.

    A fixture is either a single file or a directory of files named
    ``<zone>_<date>.json`` with schema
    ``{"market_date", "zone", "unit": "EUR_MWH", "prices": [96]}``.
    """

    def __init__(self, path: Path):
        self.path = Path(path)

    def _resolve(self, market_date: date, zone: str) -> Path:
        if self.path.is_dir():
            return self.path / f"{zone.lower()}_{market_date.isoformat()}.json"
        return self.path

    def fetch_prices(self, market_date: date, zone: str = "AT") -> PriceCurve:
        path = self._resolve(market_date, zone)
        if not path.exists():
            raise ProviderDataError(f"price fixture not found: {path}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ProviderParseError(f"{path}: {exc}") from exc
        prices = doc.get("prices", [])
        unit = doc.get("unit", "EUR_MWH")
        if unit == "EUR_KWH":
            prices = [p * 1000.0 for p in prices]
        elif unit != "EUR_MWH":
            raise ProviderDataError(f"{path}: unknown unit {unit!r}")
        if len(prices) not in (24, SLOTS_PER_DAY):
            raise ProviderDataError(
                f"{path}: expected 24 or 96 prices, got {len(prices)}"
            )
        fixture_date = date.fromisoformat(doc["market_date"])
        try:
            return PriceCurve(
                prices=tuple(upsample_to_quarter_hours(prices)),
                market_date=fixture_date,
                source="fixture",
            )
        except DomainError as exc:
            raise ProviderDataError(f"{path}: {exc}") from exc


class EntsoePriceProvider:
    """Day-ahead price client for the European transparency platform.

    Fetches the A44 document for the zone/date, reads every period point,
    fills publication gaps by carrying the previous point forward, and
    normalizes to 96 quarter-hour EUR/MWh points.
    """

    def __init__(
        self,
        token: Optional[str] = None,
        endpoint: str = ENTSOE_ENDPOINT,
        transport: Optional[httpx.BaseTransport] = None,
        timeout: float = 30.0,
    ):
        self.token = token if token is not None else os.environ.get("ENTSOE_API_TOKEN", "")
        self.endpoint = endpoint
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def fetch_prices(self, market_date: date, zone: str = "AT") -> PriceCurve:
        if not self.token:
            raise ProviderConfigError("ENTSOE_API_TOKEN is not configured")
        eic = ZONE_EIC.get(zone.upper())
        if eic is None:
            raise ProviderConfigError(f"unknown bidding zone: {zone!r}")
        start = market_date.strftime("%Y%m%d0000")
        end = (market_date + timedelta(days=1)).strftime("%Y%m%d0000")
        try:
            response = self._client.get(
                self.endpoint,
                params={
                    "documentType": "A44",
                    "in_Domain": eic,
                    "out_Domain": eic,
                    "periodStart": start,
                    "periodEnd": end,
                    "securityToken": self.token,
                },
            )
        except httpx.TransportError as exc:
            raise ProviderError(f"transparency platform unreachable: {exc}") from exc
        if response.status_code != 200:
            raise ProviderError(
                f"transparency platform returned HTTP {response.status_code}"
            )
        values = parse_day_ahead_document(response.text)
        return PriceCurve(
            prices=tuple(upsample_to_quarter_hours(values)),
            market_date=market_date,
            source="live_api",
        )


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_day_ahead_document(xml_text: str) -> list[float]:
    """Extract the ordered price series from a day-ahead market document.

    Points carry 1-based positions; omitted positions repeat the previous
    value (curve type A03 publication style).
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise ProviderParseError(
            f"malformed market document at byte offset {exc.position[1]}: {exc}"
        ) from exc
    if _strip_ns(root.tag) == "Acknowledgement_MarketDocument":
        raise ProviderDataError("platform acknowledged the query but returned no data")

    values: list[float] = []
    for series in root.iter():
        if _strip_ns(series.tag) != "Period":
            continue
        resolution = ""
        points: dict[int, float] = {}
        for child in series.iter():
            tag = _strip_ns(child.tag)
            if tag == "resolution":
                resolution = (child.text or "").strip()
            elif tag == "Point":
                position = None
                amount = None
                for leaf in child:
                    leaf_tag = _strip_ns(leaf.tag)
                    if leaf_tag == "position":
                        position = int(leaf.text)
                    elif leaf_tag in ("price.amount", "amount"):
                        amount = float(leaf.text)
                if position is None or amount is None:
                    raise ProviderParseError("point without position or amount")
                points[position] = amount
        if not points:
            continue
        per_period = {"PT15M": SLOTS_PER_DAY, "PT60M": 24}.get(resolution)
        if per_period is None:
            raise ProviderDataError(f"unsupported market resolution {resolution!r}")
        previous = points[min(points)]
        for position in range(1, per_period + 1):
            previous = points.get(position, previous)
            values.append(previous)
    if not values:
        raise ProviderDataError("market document contained no price periods")
    return values


class FixtureCalendarProvider:
    """Loads calendar events from a JSON fixture.

    Entries are either concrete (``{"title", "start", "end"}`` with ISO-8601
    timestamps) or weekly-recurring (``{"title", "weekdays": [...],
    "start_time", "end_time"}``). Recurring entries are expanded into
    concrete instances covering the queried window at load time.
    """

    WEEKDAY_NAMES = {
        "mon": 0, "monday": 0, "tue": 1, "tuesday": 1, "wed": 2, "wednesday": 2,
        "thu": 3, "thursday": 3, "fri": 4, "friday": 4, "sat": 5, "saturday": 5,
        "sun": 6, "sunday": 6,
    }

    def __init__(self, path: Path):
        self.path = Path(path)

    def _weekday(self, value) -> int:
        if isinstance(value, int):
            return value
        try:
            return self.WEEKDAY_NAMES[str(value).lower()]
        except KeyError:
            raise ProviderDataError(f"unknown weekday: {value!r}") from None

    def fetch_events(self, window_start: datetime, window_end: datetime) -> list[CalendarEvent]:
        if not self.path.exists():
            raise ProviderDataError(f"calendar fixture not found: {self.path}")
        try:
            entries = json.loads(self.path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ProviderParseError(f"{self.path}: {exc}") from exc

        events: list[CalendarEvent] = []
        for entry in entries:
            if "weekdays" in entry:
                weekdays = {self._weekday(w) for w in entry["weekdays"]}
                start_t = time.fromisoformat(entry["start_time"])
                end_t = time.fromisoformat(entry["end_time"])
                day = window_start.date() - timedelta(days=7)
                last = window_end.date() + timedelta(days=7)
                while day <= last:
                    if day.weekday() in weekdays:
                        events.append(
                            CalendarEvent(
                                title=entry["title"],
                                start=datetime.combine(day, start_t),
                                end=datetime.combine(day, end_t),
                            )
                        )
                    day += timedelta(days=1)
            else:
                events.append(
                    CalendarEvent(
                        title=entry["title"],
                        start=datetime.fromisoformat(entry["start"]),
                        end=datetime.fromisoformat(entry["end"]),
                    )
                )
        hits = [
            e for e in events if e.start < window_end and e.end > window_start
        ]
        hits.sort(key=lambda e: e.start)
        return hits


class GoogleCalendarProvider:
    """Minimal events-list adapter; expects an already-issued OAuth token.

    Only titles and times are requested, matching the least-privilege data
    contract of the calendar tool. The interactive consent flow is out of
    scope; supply a bearer token via HEMS_CAL_CREDENTIALS (path to a JSON
    file with an ``access_token`` field).
    """

    ENDPOINT = "https://www.googleapis.com/calendar/v3/calendars/primary/events"

    def __init__(
        self,
        access_token: Optional[str] = None,
        endpoint: str = ENDPOINT,
        transport: Optional[httpx.BaseTransport] = None,
        timeout: float = 30.0,
    ):
        if access_token is None:
            credentials_path = os.environ.get("HEMS_CAL_CREDENTIALS", "")
            if not credentials_path:
                raise ProviderConfigError("HEMS_CAL_CREDENTIALS is not configured")
            try:
                access_token = json.loads(Path(credentials_path).read_text())["access_token"]
            except (OSError, ValueError, KeyError) as exc:
                raise ProviderConfigError(f"unusable calendar credentials: {exc}") from exc
        self._token = access_token
        self.endpoint = endpoint
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def fetch_events(self, window_start: datetime, window_end: datetime) -> list[CalendarEvent]:
        response = self._client.get(
            self.endpoint,
            params={
                "timeMin": window_start.isoformat() + "Z",
                "timeMax": window_end.isoformat() + "Z",
                "singleEvents": "true",
                "orderBy": "startTime",
                "fields": "items(summary,start,end)",
            },
            headers={"Authorization": f"Bearer {self._token}"},
        )
        if response.status_code in (401, 403):
            raise ProviderConfigError("calendar credentials rejected")
        if response.status_code != 200:
            raise ProviderError(f"calendar API returned HTTP {response.status_code}")
        events = []
        for item in response.json().get("items", []):
            start = item.get("start", {}).get("dateTime") or item.get("start", {}).get("date")
            end = item.get("end", {}).get("dateTime") or item.get("end", {}).get("date")
            if not start or not end:
                continue
            events.append(
                CalendarEvent(
                    title=item.get("summary", "(untitled)"),
                    start=datetime.fromisoformat(start.replace("Z", "+00:00")).replace(tzinfo=None),
                    end=datetime.fromisoformat(end.replace("Z", "+00:00")).replace(tzinfo=None),
                )
            )
        events.sort(key=lambda e: e.start)
        return events
