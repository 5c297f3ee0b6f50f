"""HTTP client for any chat-completions-style inference endpoint."""

from __future__ import annotations

import os
import time
from typing import Callable, Optional

import httpx

from .base import (
    BackendUnavailableError,
    ChatRequest,
    ChatResponse,
    RateLimitedError,
    count_prompt_tokens,
    whitespace_tokens,
)

DEFAULT_TIMEOUT = 30.0
MAX_RETRIES = 2  # transient transport failures only
BACKOFF_SECONDS = (0.5, 1.5)


class LiveBackend:
    """Talks to ``{base_url}/chat/completions`` with retry on transport faults.

    The API key is sent as a bearer header and never appears in traces,
    errors, or repr output.
    """

    def __init__(
        self,
        base_url: str,
        api_key: str = "",
        model: str = "",
        timeout: float = DEFAULT_TIMEOUT,
        sleeper: Callable[[float], None] = time.sleep,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.base_url = base_url.rstrip("/")
        self._api_key = api_key
        self.model = model
        self._sleeper = sleeper
        self._client = httpx.Client(timeout=timeout, transport=transport)

    @classmethod
    def from_env(cls, env: Optional[dict] = None) -> "LiveBackend":
        env = os.environ if env is None else env
        base_url = env.get("HEMS_LLM_BASE_URL", "")
        if not base_url:
            raise BackendUnavailableError("HEMS_LLM_BASE_URL is not configured")
        return cls(
            base_url=base_url,
            api_key=env.get("HEMS_LLM_API_KEY", ""),
            model=env.get("HEMS_LLM_MODEL", ""),
        )

    def __repr__(self) -> str:
        return f"LiveBackend(base_url={self.base_url!r}, model={self.model!r}, api_key=<redacted>)"

    def close(self) -> None:
        self._client.close()

    def complete(self, request: ChatRequest) -> ChatResponse:
        if not request.all_messages():
            raise BackendUnavailableError("empty message list")
        payload = {
            "model": request.model_id or self.model,
            "messages": [
                {"role": m.role, "content": m.content} for m in request.all_messages()
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"

        last_error: Optional[Exception] = None
        started = time.monotonic()
        for attempt in range(1 + MAX_RETRIES):
            try:
                response = self._client.post(
                    f"{self.base_url}/chat/completions", json=payload, headers=headers
                )
            except httpx.TransportError as exc:
                last_error = exc
                if attempt < MAX_RETRIES:
                    self._sleeper(BACKOFF_SECONDS[attempt])
                continue
            if response.status_code == 429:
                raise RateLimitedError("inference endpoint returned HTTP 429")
            if response.status_code >= 500:
                last_error = BackendUnavailableError(
                    f"inference endpoint returned HTTP {response.status_code}"
                )
                if attempt < MAX_RETRIES:
                    self._sleeper(BACKOFF_SECONDS[attempt])
                continue
            if response.status_code != 200:
                raise BackendUnavailableError(
                    f"inference endpoint returned HTTP {response.status_code}"
                )
            return self._parse_response(request, response, started)
        raise BackendUnavailableError(
            f"backend unavailable after {1 + MAX_RETRIES} attempts: {last_error}"
        )

    def _parse_response(
        self, request: ChatRequest, response: httpx.Response, started: float
    ) -> ChatResponse:
        try:
            doc = response.json()
            content = doc["choices"][0]["message"]["content"]
        except (ValueError, LookupError, TypeError) as exc:
            raise BackendUnavailableError(f"malformed completion payload: {exc}") from exc
        usage = doc.get("usage") or {}
        return ChatResponse(
            content=content,
            prompt_tokens=int(usage.get("prompt_tokens", count_prompt_tokens(request))),
            completion_tokens=int(
                usage.get("completion_tokens", whitespace_tokens(content))
            ),
            latency_ms=int((time.monotonic() - started) * 1000),
        )
