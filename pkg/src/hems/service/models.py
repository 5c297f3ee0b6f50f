"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class SubmitRequest(BaseModel):
    client_id: str = Field(default="anonymous", max_length=128)
    text: str
    stage: Optional[str] = None
    backend: Optional[str] = None


class SubmitAccepted(BaseModel):
    run_id: str


class VerdictBody(BaseModel):
    decision: str
    risk: str
    matched_pattern_ids: list[str] = []
    matched_categories: list[str] = []
    reason: str = ""


class RunSummaryBody(BaseModel):
    run_id: str
    scenario: str = ""
    stage: str = ""
    outcome: str
    iterations: int
    total_tokens: int
    created_at: str = ""


class RunListResponse(BaseModel):
    runs: list[RunSummaryBody]
    total: int
    offset: int
    limit: int


class PriceCurveBody(BaseModel):
    market_date: str
    zone: str
    unit: str = "EUR_MWH"
    source: str
    prices: list[float]


class ApplianceAnalytics(BaseModel):
    scheduled: int = 0
    optimal: int = 0


class AnalyticsResponse(BaseModel):
    runs: int
    outcomes: dict[str, int]
    avg_iterations: float
    avg_tokens: float
    avg_wall_ms: float
    schedules_committed: int
    appliances: dict[str, ApplianceAnalytics]
