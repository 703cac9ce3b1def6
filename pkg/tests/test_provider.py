"""
Tests for the provider boundary: replay, JSON retries and the live client against a local stub.
"""

import socket
import threading
import time

import pytest
import uvicorn
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from src.errors import AuthError, ReplayExhausted, SchemaRetriesExhausted, TransportError
from src.models import ChatMessage, MessageRole, ProviderConfig
from src.services.provider import LiveProvider, ReplayProvider, complete_json
from src.services.transcript import Transcript, load_records
from tests.conftest import BREAKUP_REPLAY, records

ASK = [ChatMessage(role=MessageRole.USER, content="Plan the scene.")]
CONFIG = ProviderConfig(backoff_seconds=0.0)


def _has_name(document):
    return [] if isinstance(document, dict) and "name" in document else ["missing field 'name'"]


class TestReplayProvider:
    def test_serves_per_tag_in_order(self):
        provider = ReplayProvider(records([
            ("director", "first"), ("screenwriter", "draft"), ("director", "second"),
        ]))

        assert provider.complete(ASK, CONFIG, "screenwriter") == "draft"
        assert provider.complete(ASK, CONFIG, "director") == "first"
        assert provider.complete(ASK, CONFIG, "director") == "second"
        assert provider.remaining() == 0

    def test_exhausted(self):
        provider = ReplayProvider(records([("director", "only")]))
        provider.complete(ASK, CONFIG, "director")

        with pytest.raises(ReplayExhausted) as exc_info:
            provider.complete(ASK, CONFIG, "director")
        assert "director" in str(exc_info.value)

    def test_unknown_tag(self):
        with pytest.raises(ReplayExhausted):
            ReplayProvider(records([("director", "x")])).complete(ASK, CONFIG, "actor-Mia")

    def test_skip_consumed_calls(self):
        provider = ReplayProvider(records([("director", "a"), ("director", "b")]), skip={"director": 1})
        assert provider.complete(ASK, CONFIG, "director") == "b"

    def test_failed_call_lands_in_transcript(self):
        transcript = Transcript()
        provider = ReplayProvider(records([("director", "only")]), transcript)
        provider.complete(ASK, CONFIG, "director")

        with pytest.raises(ReplayExhausted):
            provider.complete(ASK, CONFIG, "director")

        assert [r.call_index for r in transcript.records] == [0, 1]
        failed = transcript.records[1]
        assert failed.failed and failed.response == ""
        assert failed.error.startswith("ReplayExhausted:")
        assert failed.request == ASK
        assert transcript.counts_by_tag() == {"director": 1}

    def test_failed_records_are_not_served(self, tmp_path):
        transcript = Transcript(path=tmp_path / "transcript.jsonl")
        provider = ReplayProvider(records([("director", "only")]), transcript)
        provider.complete(ASK, CONFIG, "director")
        with pytest.raises(ReplayExhausted):
            provider.complete(ASK, CONFIG, "director")

        replayed = ReplayProvider(load_records(tmp_path))
        assert replayed.remaining("director") == 1
        assert replayed.complete(ASK, CONFIG, "director") == "only"

    def test_calls_land_in_transcript(self):
        transcript = Transcript()
        provider = ReplayProvider(records([("director", {"better": "1"})]), transcript)
        reply = provider.complete(ASK, CONFIG, "director")

        assert reply == '{"better": "1"}'
        assert len(transcript) == 1
        record = transcript.records[0]
        assert (record.call_index, record.agent_tag) == (0, "director")
        assert record.request == ASK

    def test_empty_messages(self):
        with pytest.raises(ValueError):
            ReplayProvider(records([("director", "x")])).complete([], CONFIG, "director")

    def test_breakup_fixture_loads(self):
        loaded = load_records(BREAKUP_REPLAY)
        assert len(loaded) == 25
        assert [r.call_index for r in loaded] == list(range(25))
        assert loaded[-1].agent_tag == "director"


class TestCompleteJson:
    def test_first_reply_accepted(self):
        provider = ReplayProvider(records([("director", 'Here: {"name": "Mia"}')]))
        assert complete_json(provider, ASK, CONFIG, _has_name, agent_tag="director") == {"name": "Mia"}

    def test_retries_with_feedback(self):
        transcript = Transcript()
        provider = ReplayProvider(records([
            ("director", "I am not sure."),
            ("director", '{"age": 3}'),
            ("director", '{"name": "Mia"}'),
        ]), transcript)

        assert complete_json(provider, ASK, CONFIG, _has_name, agent_tag="director") == {"name": "Mia"}

        third = transcript.records[2].request
        assert len(third) == len(ASK) + 4
        assert third[1].role is MessageRole.ASSISTANT
        assert third[1].content == "I am not sure."
        assert "missing field 'name'" in third[-1].content

    def test_gives_up_after_attempts(self):
        provider = ReplayProvider(records([("director", "nope")] * 3))

        with pytest.raises(SchemaRetriesExhausted) as exc_info:
            complete_json(provider, ASK, CONFIG, _has_name, attempts=3, agent_tag="director")
        assert exc_info.value.attempts == 3
        assert exc_info.value.last_raw == "nope"
        assert provider.remaining() == 0

    def test_attempts_must_be_positive(self):
        with pytest.raises(ValueError):
            complete_json(ReplayProvider([]), ASK, CONFIG, attempts=0)


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def _completion(content: str) -> dict:
    return {
        "id": "chatcmpl-test",
        "object": "chat.completion",
        "created": 0,
        "model": "stub-model",
        "choices": [{
            "index": 0,
            "message": {"role": "assistant", "content": content},
            "finish_reason": "stop",
        }],
        "usage": {"prompt_tokens": 1, "completion_tokens": 1, "total_tokens": 2},
    }


@pytest.fixture
def stub_server():
    """An OpenAI-compatible endpoint that fails with 503 ``failures`` times, then answers."""
    state = {"calls": 0, "failures": 1}
    app = FastAPI()

    @app.post("/v1/chat/completions")
    async def chat_completions():
        state["calls"] += 1
        if state["calls"] <= state["failures"]:
            return JSONResponse(status_code=503, content={"error": {"message": "overloaded"}})
        return JSONResponse(_completion('{"name": "Mia"}'))

    port = _free_port()
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started and time.monotonic() < deadline:
        time.sleep(0.05)

    yield f"http://127.0.0.1:{port}/v1", state

    server.should_exit = True
    thread.join(timeout=5)


class TestLiveProvider:
    def test_missing_key(self, monkeypatch):
        monkeypatch.delenv("FILMAGENT_API_KEY", raising=False)
        with pytest.raises(AuthError) as exc_info:
            LiveProvider(CONFIG)
        assert "FILMAGENT_API_KEY" in str(exc_info.value)

    def test_transient_error_is_retried(self, monkeypatch, stub_server):
        base_url, state = stub_server
        monkeypatch.setenv("FILMAGENT_API_KEY", "test-key")
        config = ProviderConfig(base_url=base_url, max_retries=2, backoff_seconds=0.0, timeout=5.0)
        transcript = Transcript()

        reply = LiveProvider(config, transcript).complete(ASK, config, "director")

        assert reply == '{"name": "Mia"}'
        assert state["calls"] == 2
        assert len(transcript) == 1

    def test_retries_run_out(self, monkeypatch, stub_server):
        base_url, state = stub_server
        state["failures"] = 10
        monkeypatch.setenv("FILMAGENT_API_KEY", "test-key")
        config = ProviderConfig(base_url=base_url, max_retries=1, backoff_seconds=0.0, timeout=5.0)

        transcript = Transcript()

        with pytest.raises(TransportError):
            LiveProvider(config, transcript).complete(ASK, config, "director")
        assert state["calls"] == 2
        (record,) = transcript.records
        assert record.failed
        assert record.error.startswith("TransportError: chat completion failed after 2 attempt(s)")
