from .base import (
    Backend,
    BackendError,
    BackendUnavailableError,
    ChatRequest,
    ChatResponse,
    Message,
    RateLimitedError,
    count_prompt_tokens,
    whitespace_tokens,
)
from .live import LiveBackend
from .scripted import ScriptedBackend

__all__ = [
    "Backend",
    "BackendError",
    "BackendUnavailableError",
    "ChatRequest",
    "ChatResponse",
    "LiveBackend",
    "Message",
    "RateLimitedError",
    "ScriptedBackend",
    "count_prompt_tokens",
    "whitespace_tokens",
]
