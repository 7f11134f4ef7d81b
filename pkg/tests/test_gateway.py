"""Gateway tests: scripted mock provider, live HTTP provider, script loading."""

import json
import threading
from collections import deque
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from tutorkit.errors import (
    ProviderProtocolError,
    ProviderUnavailableError,
    ScriptValidationError,
    ValidationError,
)
from tutorkit.gateway import (
    ChatMessage,
    GatewayConfig,
    HttpChatProvider,
    MockChatProvider,
    MockScript,
    bundled_demo_script,
    complete,
    load_script,
    make_provider,
)

from conftest import journey_script


def history(*turns):
    msgs = [ChatMessage("system", "You are a tutor.")]
    for k, content in enumerate(turns):
        msgs.append(ChatMessage("student" if k % 2 == 0 else "tutor", content))
    return msgs


class _StubHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        self.server.requests.append(
            {"body": json.loads(body), "headers": dict(self.headers)}
        )
        if self.server.responses:
            status, payload = self.server.responses.popleft()
        else:
            status, payload = 200, chat_reply("fallback")
        raw = payload.encode("utf-8") if isinstance(payload, str) else payload
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def log_message(self, *args):
        pass


def chat_reply(text) -> str:
    return json.dumps({"choices": [{"message": {"role": "assistant", "content": text}}]})


@pytest.fixture()
def stub_llm():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    server.requests = []
    server.responses = deque()
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield server
    finally:
        server.shutdown()
        server.server_close()


def live_config(server, **overrides) -> GatewayConfig:
    values = {
        "provider": "live",
        "endpoint": f"http://127.0.0.1:{server.server_address[1]}/v1/chat/completions",
        "api_key": "test-key",
        "model": "demo-model",
        "timeout": 5.0,
        "max_retries": 3,
        "backoff_base": 0.001,
    }
    values.update(overrides)
    return GatewayConfig(**values)


class TestChatMessage:
    def test_roles_validated(self):
        ChatMessage("tutor", "hi")
        with pytest.raises(ValidationError, match="role"):
            ChatMessage("assistant", "hi")

    def test_dict_round_trip(self):
        msg = ChatMessage("student", "hello")
        assert ChatMessage.from_dict(msg.to_dict()) == msg


class TestGatewayConfig:
    def test_unknown_provider_rejected(self):
        with pytest.raises(ValidationError, match="provider"):
            GatewayConfig(provider="imaginary")

    def test_from_env_reads_variables(self, monkeypatch):
        monkeypatch.setenv("TUTORKIT_LLM_PROVIDER", "live")
        monkeypatch.setenv("TUTORKIT_LLM_ENDPOINT", "http://example.test/v1")
        monkeypatch.setenv("TUTORKIT_LLM_API_KEY", "sk-stub")
        monkeypatch.setenv("TUTORKIT_LLM_MODEL", "tiny")
        config = GatewayConfig.from_env()
        assert config.provider == "live"
        assert config.endpoint == "http://example.test/v1"
        assert config.api_key == "sk-stub"
        assert config.model == "tiny"

    def test_from_env_defaults_to_mock(self, monkeypatch):
        for var in ("TUTORKIT_LLM_PROVIDER", "TUTORKIT_LLM_ENDPOINT",
                    "TUTORKIT_LLM_API_KEY", "TUTORKIT_LLM_MODEL"):
            monkeypatch.delenv(var, raising=False)
        config = GatewayConfig.from_env(model="override")
        assert config.provider == "mock"
        assert config.model == "override"

    def test_from_env_base_applies_when_env_unset(self, monkeypatch):
        for var in ("TUTORKIT_LLM_PROVIDER", "TUTORKIT_LLM_ENDPOINT",
                    "TUTORKIT_LLM_API_KEY", "TUTORKIT_LLM_MODEL"):
            monkeypatch.delenv(var, raising=False)
        config = GatewayConfig.from_env(
            {"provider": "live", "endpoint": "http://file.test/v1", "timeout": 3.0}
        )
        assert config.provider == "live"
        assert config.endpoint == "http://file.test/v1"
        assert config.timeout == 3.0

    def test_environment_beats_base(self, monkeypatch):
        monkeypatch.setenv("TUTORKIT_LLM_ENDPOINT", "http://env.test/v1")
        config = GatewayConfig.from_env(
            {"provider": "live", "endpoint": "http://file.test/v1"}
        )
        assert config.endpoint == "http://env.test/v1"
        assert config.provider == "live"

    def test_explicit_override_beats_environment(self, monkeypatch):
        monkeypatch.setenv("TUTORKIT_LLM_PROVIDER", "live")
        config = GatewayConfig.from_env(provider="mock")
        assert config.provider == "mock"

    def test_unknown_base_setting_rejected(self):
        with pytest.raises(ValidationError, match="unknown gateway settings"):
            GatewayConfig.from_env({"reply_speed": "fast"})


class TestLoadScript:
    def test_loads_from_path(self, tmp_path):
        path = tmp_path / "script.json"
        path.write_text(json.dumps({
            "replies": ["hi"],
            "terminal": "done FINISHED.",
            "rules": [{"contains": "help", "reply": "a hint"}],
        }), encoding="utf-8")
        script = load_script(path)
        assert script.replies == ("hi",)
        assert script.rules[0].contains == "help"

    def test_non_object_rejected(self):
        with pytest.raises(ScriptValidationError, match="object"):
            load_script(["hi"])

    def test_missing_or_empty_replies_rejected(self):
        with pytest.raises(ScriptValidationError, match="replies"):
            load_script({"terminal": "FINISHED."})
        with pytest.raises(ScriptValidationError, match="replies"):
            load_script({"replies": [], "terminal": "FINISHED."})

    def test_blank_reply_rejected(self):
        with pytest.raises(ScriptValidationError, match="non-empty"):
            load_script({"replies": ["hi", "  "], "terminal": "FINISHED."})

    def test_terminal_must_carry_sentinel(self):
        with pytest.raises(ScriptValidationError, match="terminal"):
            load_script({"replies": ["hi"], "terminal": "bye"})
        with pytest.raises(ScriptValidationError, match="terminal"):
            load_script({"replies": ["hi"]})

    def test_malformed_rule_rejected(self):
        with pytest.raises(ScriptValidationError, match="rule"):
            load_script({
                "replies": ["hi"],
                "terminal": "FINISHED.",
                "rules": [{"contains": "x"}],
            })


class TestMockChatProvider:
    def script(self):
        return MockScript(
            replies=("first", "second"),
            terminal="all done FINISHED.",
            rules=(load_script({
                "replies": ["x"],
                "terminal": "FINISHED.",
                "rules": [{"contains": "hint", "reply": "here is a hint"}],
            }).rules),
        )

    def test_replays_in_order_then_terminal(self):
        provider = MockChatProvider(self.script())
        assert provider.complete(history()) == "first"
        assert provider.complete(history("ok")) == "second"
        assert provider.complete(history("ok", "second", "go on")) == "all done FINISHED."
        assert provider.complete(history("again?")) == "all done FINISHED."

    def test_rule_matches_latest_student_message(self):
        provider = MockChatProvider(self.script())
        assert provider.complete(history("give me a hint")) == "here is a hint"
        # The rule reply must not consume an ordered reply.
        assert provider.complete(history("ok")) == "first"

    def test_rule_ignores_tutor_content(self):
        provider = MockChatProvider(self.script())
        msgs = history("no clue", "maybe try a hint", "ok then")
        assert provider.complete(msgs) == "first"

    def test_rules_skipped_without_student_turn(self):
        provider = MockChatProvider(self.script())
        assert provider.complete([ChatMessage("system", "hint hint")]) == "first"

    def test_positions_are_per_provider(self):
        one = MockChatProvider(self.script())
        two = MockChatProvider(self.script())
        assert one.complete(history()) == "first"
        assert two.complete(history()) == "first"

    def test_history_validation(self):
        provider = MockChatProvider(self.script())
        with pytest.raises(ValidationError, match="empty"):
            provider.complete([])
        with pytest.raises(ValidationError, match="system"):
            provider.complete([ChatMessage("student", "hi")])


class TestHttpChatProvider:
    def test_requires_endpoint(self):
        with pytest.raises(ValidationError, match="endpoint"):
            HttpChatProvider(GatewayConfig(provider="live"))

    def test_success_round_trip(self, stub_llm):
        stub_llm.responses.append((200, chat_reply("hello there")))
        provider = HttpChatProvider(live_config(stub_llm))
        reply = provider.complete(history("hi", "welcome", "thanks"))
        assert reply == "hello there"
        request = stub_llm.requests[0]
        assert request["headers"]["Authorization"] == "Bearer test-key"
        assert request["body"]["model"] == "demo-model"
        assert [m["role"] for m in request["body"]["messages"]] == [
            "system", "user", "assistant", "user",
        ]
        assert request["body"]["messages"][0]["content"] == "You are a tutor."

    def test_api_key_is_optional(self, stub_llm):
        stub_llm.responses.append((200, chat_reply("ok")))
        provider = HttpChatProvider(live_config(stub_llm, api_key=""))
        provider.complete(history())
        assert "Authorization" not in stub_llm.requests[0]["headers"]

    def test_retries_server_errors_then_succeeds(self, stub_llm):
        stub_llm.responses.extend([(500, "{}"), (503, "{}"), (200, chat_reply("third"))])
        provider = HttpChatProvider(live_config(stub_llm))
        assert provider.complete(history()) == "third"
        assert len(stub_llm.requests) == 3

    def test_gives_up_after_max_retries(self, stub_llm):
        stub_llm.responses.extend([(500, "{}")] * 3)
        provider = HttpChatProvider(live_config(stub_llm))
        with pytest.raises(ProviderUnavailableError, match="after 3 attempts"):
            provider.complete(history())
        assert len(stub_llm.requests) == 3

    def test_backoff_doubles_between_attempts(self, stub_llm, monkeypatch):
        sleeps = []
        monkeypatch.setattr("tutorkit.gateway.time.sleep", sleeps.append)
        stub_llm.responses.extend([(500, "{}")] * 3)
        provider = HttpChatProvider(live_config(stub_llm, backoff_base=0.25))
        with pytest.raises(ProviderUnavailableError):
            provider.complete(history())
        assert sleeps == [0.25, 0.5]

    def test_connection_failure_is_unavailable(self):
        config = GatewayConfig(
            provider="live", endpoint="http://127.0.0.1:9/v1",
            max_retries=2, backoff_base=0.001, timeout=0.5,
        )
        with pytest.raises(ProviderUnavailableError):
            HttpChatProvider(config).complete(history())

    def test_client_error_fails_fast(self, stub_llm):
        stub_llm.responses.append((401, json.dumps({"error": "bad key"})))
        provider = HttpChatProvider(live_config(stub_llm))
        with pytest.raises(ProviderProtocolError, match="401") as excinfo:
            provider.complete(history())
        assert len(stub_llm.requests) == 1
        assert "bad key" in excinfo.value.payload

    def test_malformed_json_is_protocol_error(self, stub_llm):
        stub_llm.responses.append((200, "this is not json"))
        provider = HttpChatProvider(live_config(stub_llm))
        with pytest.raises(ProviderProtocolError, match="shape"):
            provider.complete(history())

    def test_missing_choices_is_protocol_error(self, stub_llm):
        stub_llm.responses.append((200, json.dumps({"choices": []})))
        provider = HttpChatProvider(live_config(stub_llm))
        with pytest.raises(ProviderProtocolError):
            provider.complete(history())

    def test_non_text_content_is_protocol_error(self, stub_llm):
        stub_llm.responses.append(
            (200, json.dumps({"choices": [{"message": {"content": 42}}]}))
        )
        provider = HttpChatProvider(live_config(stub_llm))
        with pytest.raises(ProviderProtocolError, match="text"):
            provider.complete(history())


class TestMakeProviderAndComplete:
    def test_mock_needs_script_or_path(self):
        with pytest.raises(ValidationError, match="script"):
            make_provider(GatewayConfig())
        provider = make_provider(GatewayConfig(), script=journey_script())
        assert isinstance(provider, MockChatProvider)

    def test_mock_from_script_path(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(json.dumps({"replies": ["yo"], "terminal": "FINISHED."}),
                        encoding="utf-8")
        provider = make_provider(GatewayConfig(script_path=str(path)))
        assert provider.complete(history()) == "yo"

    def test_live_selected_by_config(self, stub_llm):
        provider = make_provider(live_config(stub_llm))
        assert isinstance(provider, HttpChatProvider)

    def test_complete_prefers_explicit_provider(self, stub_llm):
        stub_llm.responses.append((200, chat_reply("from stub")))
        provider = HttpChatProvider(live_config(stub_llm))
        # Config says mock and has no script; the explicit provider wins.
        assert complete(history(), GatewayConfig(), provider=provider) == "from stub"

    def test_complete_does_not_mutate_history(self):
        msgs = history("hi")
        snapshot = list(msgs)
        complete(msgs, GatewayConfig(), provider=MockChatProvider(journey_script()))
        assert msgs == snapshot


class TestBundledDemoScript:
    def test_well_formed(self):
        script = bundled_demo_script()
        assert script.replies
        assert "FINISHED." in script.terminal
        assert any("*Specific topics" == r.contains for r in script.rules)

    def test_summary_rule_is_parseable(self):
        from tutorkit.prompts import build_summary_prompt, parse_summary

        script = bundled_demo_script()
        provider = MockChatProvider(script)
        reply = provider.complete(history(build_summary_prompt()))
        parsed = parse_summary(reply, "Pronouns")
        assert parsed.specific_topics != "Unknown"
