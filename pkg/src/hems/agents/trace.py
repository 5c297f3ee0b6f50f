"""Run traces: the ordered record of one orchestration's ReAct iterations."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from ..domain import BinarySchedule, schedule_to_json

OUTCOME_RUNNING = "running"
OUTCOME_FINISHED = "finished"
OUTCOME_ABORTED = "aborted"
OUTCOME_ITERATION_CAP = "iteration_cap"
OUTCOME_REJECTED = "rejected_by_gateway"

DEFAULT_ITERATION_CAP = 15


@dataclass(frozen=True)
class Iteration:
    index: int
    thought: str
    action_verb: str
    action_args: dict[str, str]
    action_raw: str
    observation: str
    prompt_tokens: int
    completion_tokens: int
    warnings: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "thought": self.thought,
            "action_verb": self.action_verb,
            "action_args": dict(self.action_args),
            "action_raw": self.action_raw,
            "observation": self.observation,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "warnings": list(self.warnings),
        }


@dataclass
class RunTrace:
    run_id: str
    request: str
    scenario: str
    stage: str
    market_date: date
    iterations: list[Iteration] = field(default_factory=list)
    schedules: list[BinarySchedule] = field(default_factory=list)
    outcome: str = OUTCOME_RUNNING
    summary: str = ""
    wall_ms: int = 0

    @property
    def prompt_tokens(self) -> int:
        return sum(i.prompt_tokens for i in self.iterations)

    @property
    def completion_tokens(self) -> int:
        return sum(i.completion_tokens for i in self.iterations)

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens

    @property
    def iteration_count(self) -> int:
        return len(self.iterations)

    @property
    def complete(self) -> bool:
        return self.outcome != OUTCOME_RUNNING

    def to_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "request": self.request,
            "scenario": self.scenario,
            "stage": self.stage,
            "market_date": self.market_date.isoformat(),
            "iterations": [i.to_json() for i in self.iterations],
            "schedules": [schedule_to_json(s, self.market_date) for s in self.schedules],
            "outcome": self.outcome,
            "summary": self.summary,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "total_tokens": self.total_tokens,
            "wall_ms": self.wall_ms,
            "complete": self.complete,
        }
