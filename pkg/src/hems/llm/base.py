"""Chat-completion abstraction shared by the live and scripted backends."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable


class BackendError(Exception):
    """Base class for backend failures."""


class BackendUnavailableError(BackendError):
    """Transport failed after retries, or the endpoint returned a hard error."""


class RateLimitedError(BackendError):
    """HTTP 429 from the inference endpoint; callers should abort cleanly."""


@dataclass(frozen=True)
class Message:
    role: str  # "system", "user" or "assistant"
    content: str


@dataclass(frozen=True)
class ChatRequest:
    model_id: str
    system_prompt: str
    messages: tuple[Message, ...]
    temperature: float = 0.0  # deterministic scheduling by default
    max_tokens: int = 2048

    def all_messages(self) -> tuple[Message, ...]:
        if self.system_prompt:
            return (Message("system", self.system_prompt), *self.messages)
        return self.messages


@dataclass(frozen=True)
class ChatResponse:
    content: str
    prompt_tokens: int
    completion_tokens: int
    latency_ms: int = 0

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


@runtime_checkable
class Backend(Protocol):
    def complete(self, request: ChatRequest) -> ChatResponse: ...


def whitespace_tokens(text: str) -> int:
    """Stable token proxy used by the scripted backend's accounting."""
    return len(text.split())


def count_prompt_tokens(request: ChatRequest) -> int:
    return sum(whitespace_tokens(m.content) for m in request.all_messages())
