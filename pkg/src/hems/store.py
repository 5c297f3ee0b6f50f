"""Append-only persistence for run traces and committed schedules.

One JSON-lines file per run (meta record, then one record per iteration,
then an outcome record) plus one JSON file per committed schedule. No
database: the layout is greppable and survives crashes mid-run.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Optional

from .domain import BinarySchedule, schedule_filename, schedule_to_json
from .agents.trace import Iteration, OUTCOME_RUNNING


class UnknownRunError(KeyError):
    pass


@dataclass(frozen=True)
class RunSummary:
    run_id: str
    scenario: str
    stage: str
    outcome: str
    iterations: int
    total_tokens: int
    created_at: str


class RunStore:
    """Thread-safe store rooted at a data directory."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.runs_dir = self.root / "runs"
        self.schedules_dir = self.root / "schedules"
        self.runs_dir.mkdir(parents=True, exist_ok=True)
        self.schedules_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def new_run_id(self, now: Optional[datetime] = None) -> str:
        now = now or datetime.now(timezone.utc)
        return f"run-{now.strftime('%Y%m%dT%H%M%S')}-{uuid.uuid4().hex[:8]}"

    def _path(self, run_id: str) -> Path:
        if "/" in run_id or "\\" in run_id or ".." in run_id:
            raise UnknownRunError(run_id)
        return self.runs_dir / f"{run_id}.jsonl"

    def _append(self, run_id: str, record: dict) -> None:
        with self._lock:
            with self._path(run_id).open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record) + "\n")

    def start_run(self, run_id: str, meta: dict) -> None:
        self._append(run_id, {"type": "meta", **meta})

    def append_iteration(self, run_id: str, iteration: Iteration) -> None:
        self._append(run_id, {"type": "iteration", **iteration.to_json()})

    def finish_run(self, run_id: str, outcome: str, summary: str, wall_ms: int) -> None:
        self._append(
            run_id,
            {"type": "outcome", "outcome": outcome, "summary": summary, "wall_ms": wall_ms},
        )

    def save_schedule(self, run_id: str, schedule: BinarySchedule, market_date: date) -> Path:
        path = self.schedules_dir / schedule_filename(run_id, schedule.appliance_id)
        doc = schedule_to_json(schedule, market_date)
        doc["run_id"] = run_id
        with self._lock:
            path.write_text(json.dumps(doc, indent=1), encoding="utf-8")
        return path

    def exists(self, run_id: str) -> bool:
        try:
            return self._path(run_id).exists()
        except UnknownRunError:
            return False

    def read_trace(self, run_id: str) -> dict:
        """Trace as accumulated so far; ``complete`` flips once the outcome lands."""
        path = self._path(run_id)
        if not path.exists():
            raise UnknownRunError(run_id)
        with self._lock:
            lines = path.read_text(encoding="utf-8").splitlines()
        meta: dict = {}
        iterations: list[dict] = []
        outcome = {"outcome": OUTCOME_RUNNING, "summary": "", "wall_ms": 0}
        for line in lines:
            record = json.loads(line)
            kind = record.pop("type", None)
            if kind == "meta":
                meta = record
            elif kind == "iteration":
                iterations.append(record)
            elif kind == "outcome":
                outcome = record
        prompt_tokens = sum(i.get("prompt_tokens", 0) for i in iterations)
        completion_tokens = sum(i.get("completion_tokens", 0) for i in iterations)
        return {
            "run_id": run_id,
            **meta,
            "iterations": iterations,
            "outcome": outcome["outcome"],
            "summary": outcome.get("summary", ""),
            "wall_ms": outcome.get("wall_ms", 0),
            "prompt_tokens": prompt_tokens,
            "completion_tokens": completion_tokens,
            "total_tokens": prompt_tokens + completion_tokens,
            "complete": outcome["outcome"] != OUTCOME_RUNNING,
            "schedules": self.read_schedules(run_id),
        }

    def read_schedules(self, run_id: str) -> list[dict]:
        docs = []
        for path in sorted(self.schedules_dir.glob(f"{run_id}_*.json")):
            docs.append(json.loads(path.read_text(encoding="utf-8")))
        return docs

    def list_run_ids(self) -> list[str]:
        paths = sorted(self.runs_dir.glob("run-*.jsonl"))
        return [p.stem for p in paths]

    def list_runs(self, offset: int = 0, limit: int = 50) -> tuple[list[RunSummary], int]:
        run_ids = self.list_run_ids()
        total = len(run_ids)
        window = run_ids[offset : offset + limit]
        summaries = []
        for run_id in window:
            trace = self.read_trace(run_id)
            summaries.append(
                RunSummary(
                    run_id=run_id,
                    scenario=trace.get("scenario", ""),
                    stage=trace.get("stage", ""),
                    outcome=trace["outcome"],
                    iterations=len(trace["iterations"]),
                    total_tokens=trace["total_tokens"],
                    created_at=trace.get("created_at", ""),
                )
            )
        return summaries, total
