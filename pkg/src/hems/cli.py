"""Command-line entry points: oracle queries, one-off runs, evaluation, serving."""

from __future__ import annotations

import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import click

from .agents import Providers, run_orchestration
from .domain import APPLIANCES
from .harness import (
    DEFAULT_REQUESTS,
    SCENARIO_ANALYTICAL,
    SCENARIO_MULTI,
    SCENARIO_SINGLE,
    ScenarioSpec,
    emit_report,
    load_price_fixture,
    render_report_table,
    run_scenario,
    scenario_deadlines,
)
from .llm import LiveBackend, ScriptedBackend
from .optimizer import calculate_window_sums, optimal_plan
from .prompts import STAGE_BASELINE, STAGE_EXPLICIT, STAGE_MINIMAL, STAGES
from .security import SecurityGateway
from .store import RunStore

BACKENDS = ("scripted", "live")


def _make_backend(name: str):
    return ScriptedBackend() if name == "scripted" else LiveBackend.from_env()


def _providers(prices: Path, calendar: Path | None, zone: str) -> Providers:
    from .providers import FixtureCalendarProvider, FixturePriceProvider

    curve = load_price_fixture(prices)
    return Providers(
        prices=FixturePriceProvider(prices),
        calendar=FixtureCalendarProvider(calendar) if calendar else None,
        market_date=curve.market_date,
        zone=zone,
    )


@click.group()
def main():
    """Home energy management orchestration engine."""


@main.command()
@click.option("--prices", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--window", type=int, default=None, help="Window size in slots.")
@click.option("--plan", is_flag=True, help="Optimal start per appliance (the default).")
@click.option("--calendar", type=click.Path(exists=True, path_type=Path), default=None)
def oracle(prices: Path, window: int | None, plan: bool, calendar: Path | None):
    """Exact optimizer queries against a price fixture."""
    if window is not None and plan:
        raise click.UsageError("--window and --plan are mutually exclusive")
    curve = load_price_fixture(prices)
    if window is not None:
        ws = calculate_window_sums(curve, window)
        click.echo(
            json.dumps(
                {
                    "window_size": ws.window_size,
                    "min_window_index": ws.min_window_index,
                    "min_sum": ws.min_sum,
                    "max_window_index": ws.max_window_index,
                    "max_sum": ws.max_sum,
                    "sums": list(ws.sums),
                }
            )
        )
        return
    deadlines = scenario_deadlines(curve, calendar)
    result = optimal_plan(curve, APPLIANCES, deadlines)
    click.echo(
        json.dumps(
            {
                "market_date": curve.market_date.isoformat(),
                "optima": [
                    {
                        "appliance_id": o.appliance_id,
                        "start_slot": o.start_slot,
                        "price_sum": o.price_sum,
                    }
                    for o in result.optima
                ],
                "total_price_sum": result.total_price_sum,
            }
        )
    )


@main.command()
@click.option("--request", "request_text", required=True)
@click.option("--backend", type=click.Choice(BACKENDS), default="scripted")
@click.option("--stage", type=click.Choice(STAGES), default=STAGE_EXPLICIT)
@click.option("--prices", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--calendar", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.option("--client-id", default="cli")
def run(request_text, backend, stage, prices, calendar, out, client_id):
    """Validate one request through the gateway and orchestrate it."""
    gateway = SecurityGateway()
    verdict = gateway.validate_request(client_id, request_text, now=time.time())
    if not verdict.accepted:
        click.echo(json.dumps(verdict.to_json()), err=True)
        sys.exit(2)

    store = RunStore(out) if out else None
    run_id = (
        store.new_run_id(datetime.now(timezone.utc))
        if store
        else f"cli-{datetime.now(timezone.utc).strftime('%Y%m%dT%H%M%S')}"
    )
    providers = _providers(prices, calendar, "AT")
    if store:
        store.start_run(
            run_id,
            {
                "request": request_text,
                "scenario": "cli",
                "stage": stage,
                "backend": backend,
                "market_date": providers.market_date.isoformat(),
                "created_at": datetime.now(timezone.utc).isoformat(),
            },
        )

    def on_iteration(iteration):
        click.echo(json.dumps(iteration.to_json()))
        if store:
            store.append_iteration(run_id, iteration)

    def on_schedule(schedule):
        if store:
            store.save_schedule(run_id, schedule, providers.market_date)

    trace = run_orchestration(
        verdict.wrapped_input,
        stage,
        _make_backend(backend),
        providers,
        run_id=run_id,
        scenario="cli",
        on_iteration=on_iteration,
        on_schedule=on_schedule,
    )
    if store:
        store.finish_run(run_id, trace.outcome, trace.summary, trace.wall_ms)
    click.echo(
        json.dumps(
            {
                "run_id": run_id,
                "outcome": trace.outcome,
                "summary": trace.summary,
                "iterations": trace.iteration_count,
                "total_tokens": trace.total_tokens,
                "wall_ms": trace.wall_ms,
            }
        )
    )


@main.command(name="eval")
@click.option("--scenario", default="all", help="all or one scenario name.")
@click.option("--backend", type=click.Choice(BACKENDS), default="scripted")
@click.option("--runs", type=int, default=5)
@click.option("--out", type=click.Path(path_type=Path), default=Path("reports"))
@click.option("--prices", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--calendar", type=click.Path(exists=True, path_type=Path), default=None)
def evaluate(scenario, backend, runs, out, prices, calendar):
    """Reproduce the evaluation scenarios and write report files."""
    specs = []
    if scenario in ("all", SCENARIO_SINGLE):
        specs.append(
            ScenarioSpec(
                SCENARIO_SINGLE, DEFAULT_REQUESTS[SCENARIO_SINGLE],
                repetitions=runs, price_fixture=prices, calendar_fixture=calendar,
            )
        )
    if scenario in ("all", SCENARIO_MULTI):
        specs.append(
            ScenarioSpec(
                SCENARIO_MULTI, DEFAULT_REQUESTS[SCENARIO_MULTI],
                repetitions=runs, price_fixture=prices, calendar_fixture=calendar,
            )
        )
    if scenario in ("all", SCENARIO_ANALYTICAL):
        for stage in (STAGE_BASELINE, STAGE_MINIMAL, STAGE_EXPLICIT):
            specs.append(
                ScenarioSpec(
                    SCENARIO_ANALYTICAL, DEFAULT_REQUESTS[SCENARIO_ANALYTICAL],
                    stage=stage, repetitions=runs,
                    price_fixture=prices, calendar_fixture=calendar,
                )
            )
    if not specs:
        raise click.BadParameter(f"unknown scenario {scenario!r}")
    backend_impl = _make_backend(backend)
    reports = [run_scenario(spec, backend_impl) for spec in specs]
    text_path, json_path = emit_report(reports, out)
    click.echo(render_report_table(reports))
    click.echo(f"wrote {text_path} and {json_path}")


@main.command()
@click.option("--port", type=int, default=8080)
@click.option("--host", default="127.0.0.1")
@click.option("--backend", type=click.Choice(BACKENDS), default="scripted")
@click.option("--prices", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--calendar", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--data-dir", type=click.Path(path_type=Path), default=Path("data"))
@click.option("--ui", type=click.Path(path_type=Path), default=None, help="Built UI assets dir.")
def serve(port, host, backend, prices, calendar, data_dir, ui):
    """Run the HTTP service (see /api/* endpoints)."""
    import uvicorn

    from .service import ServiceConfig, create_app

    app = create_app(
        ServiceConfig(
            data_dir=data_dir,
            price_fixture=prices,
            calendar_fixture=calendar,
            default_backend=backend,
            static_dir=ui,
        )
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
