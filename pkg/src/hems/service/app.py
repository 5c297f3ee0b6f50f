"""HTTP service fronting the orchestrator for the web UI and API clients.

Every request passes the security gateway before any backend work is
submitted; accepted runs execute on a worker pool and are observable by
polling while they run.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Callable, Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..agents import Providers, run_orchestration
from ..agents.trace import OUTCOME_ABORTED
from ..domain import APPLIANCES
from ..harness import load_price_fixture, scenario_deadlines
from ..llm import Backend, BackendError, LiveBackend, ScriptedBackend
from ..optimizer import optimal_start
from ..prompts import STAGE_EXPLICIT, STAGES, PromptLibrary
from ..providers import (
    FixtureCalendarProvider,
    FixturePriceProvider,
    ProviderError,
)
from ..security import SecurityGateway
from ..store import RunStore, UnknownRunError
from .models import (
    AnalyticsResponse,
    ApplianceAnalytics,
    PriceCurveBody,
    RunListResponse,
    RunSummaryBody,
    SubmitAccepted,
    SubmitRequest,
)


@dataclass
class ServiceConfig:
    data_dir: Path
    price_fixture: Path
    calendar_fixture: Optional[Path] = None
    zone: str = "AT"
    default_stage: str = STAGE_EXPLICIT
    default_backend: str = "scripted"
    iteration_cap: int = 15
    static_dir: Optional[Path] = None
    workers: int = 4


def _default_backend_factory(name: str) -> Backend:
    if name == "scripted":
        return ScriptedBackend()
    if name == "live":
        return LiveBackend.from_env()
    raise ValueError(f"unknown backend {name!r}")


def create_app(
    config: ServiceConfig,
    *,
    gateway: Optional[SecurityGateway] = None,
    clock: Callable[[], float] = time.time,
    backend_factory: Callable[[str], Backend] = _default_backend_factory,
) -> FastAPI:
    store = RunStore(config.data_dir)
    gateway = gateway or SecurityGateway()
    library = PromptLibrary()
    curve = load_price_fixture(config.price_fixture)

    def make_providers() -> Providers:
        return Providers(
            prices=FixturePriceProvider(Path(config.price_fixture)),
            calendar=(
                FixtureCalendarProvider(Path(config.calendar_fixture))
                if config.calendar_fixture is not None
                else None
            ),
            market_date=curve.market_date,
            zone=config.zone,
        )

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.executor = ThreadPoolExecutor(max_workers=config.workers)
        yield
        app.state.executor.shutdown(wait=True)

    app = FastAPI(title="hems", lifespan=lifespan)
    app.state.store = store
    app.state.gateway = gateway
    app.state.backend_calls = 0  # incremented when a run job starts a backend

    def execute_run(run_id: str, wrapped: str, stage: str, backend_name: str) -> None:
        try:
            backend = backend_factory(backend_name)
        except (BackendError, ValueError) as exc:
            store.finish_run(run_id, OUTCOME_ABORTED, f"backend unavailable: {exc}", 0)
            return
        app.state.backend_calls += 1
        try:
            trace = run_orchestration(
                wrapped,
                stage,
                backend,
                make_providers(),
                library=library,
                run_id=run_id,
                scenario="service",
                iteration_cap=config.iteration_cap,
                on_iteration=lambda it: store.append_iteration(run_id, it),
                on_schedule=lambda s: store.save_schedule(run_id, s, curve.market_date),
            )
            store.finish_run(run_id, trace.outcome, trace.summary, trace.wall_ms)
        except Exception as exc:  # noqa: BLE001 - a run must never wedge the store
            store.finish_run(run_id, OUTCOME_ABORTED, f"internal error: {exc}", 0)

    @app.post("/api/requests", response_model=SubmitAccepted, status_code=202)
    def submit_request(body: SubmitRequest):
        verdict = gateway.validate_request(body.client_id, body.text, now=clock())
        if not verdict.accepted:
            status = 429 if verdict.reason == "rate_limit" else 400
            return JSONResponse(status_code=status, content=verdict.to_json())
        stage = body.stage or config.default_stage
        if stage not in STAGES:
            raise HTTPException(status_code=400, detail=f"unknown stage {stage!r}")
        backend_name = body.backend or config.default_backend
        if backend_name not in ("scripted", "live"):
            raise HTTPException(status_code=400, detail=f"unknown backend {backend_name!r}")
        run_id = store.new_run_id(datetime.now(timezone.utc))
        store.start_run(
            run_id,
            {
                "request": body.text,
                "scenario": "service",
                "stage": stage,
                "backend": backend_name,
                "market_date": curve.market_date.isoformat(),
                "created_at": datetime.now(timezone.utc).isoformat(),
            },
        )
        app.state.executor.submit(
            execute_run, run_id, verdict.wrapped_input, stage, backend_name
        )
        return SubmitAccepted(run_id=run_id)

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str):
        try:
            return store.read_trace(run_id)
        except UnknownRunError:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id!r}") from None

    @app.get("/api/runs", response_model=RunListResponse)
    def list_runs(offset: int = Query(0, ge=0), limit: int = Query(50, ge=1, le=500)):
        summaries, total = store.list_runs(offset=offset, limit=limit)
        return RunListResponse(
            runs=[RunSummaryBody(**s.__dict__) for s in summaries],
            total=total,
            offset=offset,
            limit=limit,
        )

    @app.get("/api/schedules/{run_id}")
    def get_schedules(run_id: str):
        if not store.exists(run_id):
            raise HTTPException(status_code=404, detail=f"unknown run {run_id!r}")
        return store.read_schedules(run_id)

    @app.get("/api/prices/{market_date}", response_model=PriceCurveBody)
    def get_prices(market_date: str):
        try:
            requested = date.fromisoformat(market_date)
        except ValueError:
            raise HTTPException(status_code=400, detail="date must be ISO-8601") from None
        try:
            fetched = make_providers().prices.fetch_prices(requested, config.zone)
        except ProviderError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        if fetched.market_date != requested:
            raise HTTPException(
                status_code=404, detail=f"no prices for {market_date}"
            )
        return PriceCurveBody(
            market_date=fetched.market_date.isoformat(),
            zone=config.zone,
            source=fetched.source,
            prices=list(fetched.prices),
        )

    @app.get("/api/analytics", response_model=AnalyticsResponse)
    def analytics():
        deadlines = scenario_deadlines(curve, config.calendar_fixture)
        oracle = {
            appliance_id: optimal_start(curve, spec, deadlines.get(appliance_id))[0]
            for appliance_id, spec in APPLIANCES.items()
        }
        outcomes: dict[str, int] = {}
        iterations = tokens = wall = schedules_total = 0
        appliance_stats = {a: ApplianceAnalytics() for a in APPLIANCES}
        run_ids = store.list_run_ids()
        for run_id in run_ids:
            trace = store.read_trace(run_id)
            outcomes[trace["outcome"]] = outcomes.get(trace["outcome"], 0) + 1
            iterations += len(trace["iterations"])
            tokens += trace["total_tokens"]
            wall += trace["wall_ms"]
            for doc in trace["schedules"]:
                schedules_total += 1
                stats = appliance_stats.get(doc["appliance_id"])
                if stats is None:
                    continue
                stats.scheduled += 1
                if doc["start_slot"] == oracle.get(doc["appliance_id"]):
                    stats.optimal += 1
        n = len(run_ids)
        return AnalyticsResponse(
            runs=n,
            outcomes=outcomes,
            avg_iterations=iterations / n if n else 0.0,
            avg_tokens=tokens / n if n else 0.0,
            avg_wall_ms=wall / n if n else 0.0,
            schedules_committed=schedules_total,
            appliances=appliance_stats,
        )

    @app.get("/api/health")
    def health():
        return {"status": "ok", "market_date": curve.market_date.isoformat()}

    if config.static_dir is not None and Path(config.static_dir).exists():
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app
