import json

import httpx
import pytest

from hems.llm import (
    BackendUnavailableError,
    ChatRequest,
    LiveBackend,
    Message,
    RateLimitedError,
    ScriptedBackend,
)
from hems.llm.scripted import (
    detect_stage,
    is_analytical_query,
    is_hems_request,
    requested_appliances,
    unwrap_user_request,
)
from hems.prompts import STAGE_BASELINE, STAGE_EXPLICIT, STAGE_MINIMAL
from hems.security.gateway import wrap_privileged


def orchestrator_request(library, stage, text, history=()):
    messages = (Message("user", wrap_privileged(text)), *history)
    return ChatRequest("", library.orchestrator(stage), messages)


class TestScriptedDeterminism:
    def test_same_request_twice_is_byte_identical(self, library):
        backend = ScriptedBackend()
        req = orchestrator_request(library, STAGE_EXPLICIT, "schedule the washing machine")
        first = backend.complete(req)
        second = backend.complete(req)
        assert first == second
        assert first.content == second.content

    def test_first_action_is_get_prices(self, library):
        backend = ScriptedBackend()
        req = orchestrator_request(library, STAGE_EXPLICIT, "schedule the washing machine")
        response = backend.complete(req)
        assert "ACTION: GET_PRICES" in response.content

    def test_token_accounting_is_whitespace_counts(self, library):
        backend = ScriptedBackend()
        req = orchestrator_request(library, STAGE_EXPLICIT, "schedule the washing machine")
        response = backend.complete(req)
        expected_prompt = len(library.orchestrator(STAGE_EXPLICIT).split()) + len(
            req.messages[0].content.split()
        )
        assert response.prompt_tokens == expected_prompt
        assert response.completion_tokens == len(response.content.split())


class TestRequestClassification:
    def test_unwrap(self):
        assert unwrap_user_request(wrap_privileged("hello there")) == "hello there"
        assert unwrap_user_request("bare text") == "bare text"

    def test_stage_detection(self, library):
        assert detect_stage(library.orchestrator(STAGE_BASELINE)) == STAGE_BASELINE
        assert detect_stage(library.orchestrator(STAGE_MINIMAL)) == STAGE_MINIMAL
        assert detect_stage(library.orchestrator(STAGE_EXPLICIT)) == STAGE_EXPLICIT

    @pytest.mark.parametrize(
        "text,expected",
        [
            ("schedule all flexible loads", ["washing_machine", "dishwasher", "ev_charger"]),
            ("run the dishwasher tonight", ["dishwasher"]),
            ("charge my car by 7am", ["ev_charger"]),
            ("wash and charge everything", ["washing_machine", "dishwasher", "ev_charger"]),
            ("what is the most expensive window?", []),
        ],
    )
    def test_requested_appliances(self, text, expected):
        assert requested_appliances(text) == expected

    def test_scope(self):
        assert not is_hems_request("who won the champions league?")
        assert is_hems_request("when is electricity cheapest?")

    def test_analytical(self):
        assert is_analytical_query("what is the most expensive 3-hour window today?")
        assert not is_analytical_query("schedule my washing machine at the cheapest time")


class TestScriptedStageContrast:
    def _drive(self, library, stage, text):
        """Step the policy forward feeding canned observations; return verbs."""
        backend = ScriptedBackend()
        system = library.orchestrator(stage)
        history = [Message("user", wrap_privileged(text))]
        verbs = []
        for _ in range(6):
            response = backend.complete(ChatRequest("", system, tuple(history)))
            action_line = next(
                line for line in response.content.splitlines() if "ACTION:" in line
            )
            verb = action_line.split("ACTION:")[1].split("|")[0].strip()
            verbs.append(verb)
            if verb == "FINISH":
                break
            history.append(Message("assistant", response.content))
            if verb == "GET_PRICES":
                obs = "Observation: prices loaded, 96 slots, min=50.0 @ slot 12, max=276.0 @ slot 32\nprices=[]"
            elif verb == "CALCULATE_WINDOW_SUMS":
                obs = (
                    "Observation: window_size=12 min_window_index=7 min_sum=700.0 "
                    "max_window_index=26 max_sum=2890.0\nsums=[]"
                )
            else:
                obs = "Observation: ok"
            history.append(Message("user", obs))
        return verbs

    def test_baseline_never_uses_window_sums(self, library):
        verbs = self._drive(library, STAGE_BASELINE, "what is the most expensive 3-hour window?")
        assert "CALCULATE_WINDOW_SUMS" not in verbs
        assert verbs[-1] == "FINISH"

    def test_explicit_always_uses_window_sums(self, library):
        verbs = self._drive(library, STAGE_EXPLICIT, "what is the most expensive 3-hour window?")
        assert verbs == ["GET_PRICES", "CALCULATE_WINDOW_SUMS", "FINISH"]

    def test_minimal_uses_tool_but_misreads(self, library):
        backend = ScriptedBackend()
        system = library.orchestrator(STAGE_MINIMAL)
        history = [
            Message("user", wrap_privileged("what is the most expensive 3-hour window?")),
            Message("assistant", "Thought: x\nACTION: GET_PRICES"),
            Message("user", "Observation: prices loaded, 96 slots, min=5 @ slot 2, max=9 @ slot 30\nprices=[]"),
            Message("assistant", "Thought: x\nACTION: CALCULATE_WINDOW_SUMS | window_size=12"),
            Message("user", "Observation: window_size=12 min_window_index=7 min_sum=700.0 max_window_index=26 max_sum=2890.0\nsums=[]"),
        ]
        response = backend.complete(ChatRequest("", system, tuple(history)))
        assert "ACTION: FINISH" in response.content
        assert "slot 7" in response.content  # min misread as the headline window


def transport_with(handler):
    return httpx.MockTransport(handler)


def ok_payload(content="Thought: ok\nACTION: GET_PRICES"):
    return {
        "choices": [{"message": {"role": "assistant", "content": content}}],
        "usage": {"prompt_tokens": 11, "completion_tokens": 7},
    }


class TestLiveBackend:
    def _request(self):
        return ChatRequest("test-model", "system", (Message("user", "hi"),))

    def test_success_parses_content_and_usage(self):
        def handler(request):
            body = json.loads(request.content)
            assert body["model"] == "test-model"
            assert body["temperature"] == 0.0
            assert body["messages"][0]["role"] == "system"
            return httpx.Response(200, json=ok_payload())

        backend = LiveBackend("http://inference.local/v1", api_key="k", transport=transport_with(handler))
        response = backend.complete(self._request())
        assert response.content.endswith("GET_PRICES")
        assert response.prompt_tokens == 11
        assert response.completion_tokens == 7

    def test_retries_transport_errors_then_succeeds(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            if len(attempts) < 3:
                raise httpx.ConnectError("refused")
            return httpx.Response(200, json=ok_payload())

        sleeps = []
        backend = LiveBackend(
            "http://inference.local/v1",
            transport=transport_with(handler),
            sleeper=sleeps.append,
        )
        response = backend.complete(self._request())
        assert response.content
        assert len(attempts) == 3
        assert sleeps == [0.5, 1.5]

    def test_unreachable_after_retries(self):
        def handler(request):
            raise httpx.ConnectError("refused")

        backend = LiveBackend(
            "http://inference.local/v1",
            transport=transport_with(handler),
            sleeper=lambda _s: None,
        )
        with pytest.raises(BackendUnavailableError):
            backend.complete(self._request())

    def test_429_is_distinct(self):
        def handler(request):
            return httpx.Response(429, json={"error": "slow down"})

        backend = LiveBackend("http://inference.local/v1", transport=transport_with(handler))
        with pytest.raises(RateLimitedError):
            backend.complete(self._request())

    def test_5xx_retries_then_fails(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            return httpx.Response(503)

        backend = LiveBackend(
            "http://inference.local/v1",
            transport=transport_with(handler),
            sleeper=lambda _s: None,
        )
        with pytest.raises(BackendUnavailableError):
            backend.complete(self._request())
        assert len(attempts) == 3

    def test_key_never_in_repr_or_errors(self):
        backend = LiveBackend("http://x.local", api_key="sk-super-secret")
        assert "sk-super-secret" not in repr(backend)

    def test_auth_header_sent_but_not_logged(self):
        seen = {}

        def handler(request):
            seen["auth"] = request.headers.get("Authorization")
            return httpx.Response(200, json=ok_payload())

        backend = LiveBackend("http://x.local", api_key="sk-abc", transport=transport_with(handler))
        backend.complete(self._request())
        assert seen["auth"] == "Bearer sk-abc"

    def test_from_env_requires_base_url(self):
        with pytest.raises(BackendUnavailableError):
            LiveBackend.from_env({})

    def test_usage_fallback_to_whitespace_counts(self):
        def handler(request):
            return httpx.Response(
                200,
                json={"choices": [{"message": {"content": "one two three"}}]},
            )

        backend = LiveBackend("http://x.local", transport=transport_with(handler))
        response = backend.complete(self._request())
        assert response.completion_tokens == 3
