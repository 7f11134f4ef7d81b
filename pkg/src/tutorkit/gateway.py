"""Chat completion gateway: a live HTTP provider and a scripted mock provider.

All network traffic in the package goes through this module. Everything else
stays fully offline when the mock provider is configured.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import httpx

from .errors import (
    ProviderProtocolError,
    ProviderUnavailableError,
    ScriptValidationError,
    ValidationError,
)

logger = logging.getLogger(__name__)

SENTINEL = "FINISHED."

ROLES = ("system", "tutor", "student")
_WIRE_ROLES = {"system": "system", "tutor": "assistant", "student": "user"}

ENDPOINT_ENV = "TUTORKIT_LLM_ENDPOINT"
API_KEY_ENV = "TUTORKIT_LLM_API_KEY"
MODEL_ENV = "TUTORKIT_LLM_MODEL"
PROVIDER_ENV = "TUTORKIT_LLM_PROVIDER"


@dataclass(frozen=True)
class ChatMessage:
    """One utterance in a tutoring conversation."""

    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValidationError(f"unknown chat role {self.role!r}; expected one of {ROLES}")

    def to_dict(self) -> dict:
        return {"role": self.role, "content": self.content}

    @staticmethod
    def from_dict(obj: dict) -> "ChatMessage":
        return ChatMessage(obj["role"], obj["content"])


@dataclass(frozen=True)
class GatewayConfig:
    """Provider selection and live-call parameters."""

    provider: str = "mock"
    endpoint: str = ""
    api_key: str = ""
    model: str = ""
    temperature: float = 0.3
    timeout: float = 30.0
    max_retries: int = 3
    backoff_base: float = 0.5
    script_path: str = ""

    def __post_init__(self):
        if self.provider not in ("mock", "live"):
            raise ValidationError(f"provider must be 'mock' or 'live', got {self.provider!r}")

    @staticmethod
    def from_env(base: dict | None = None, **overrides) -> "GatewayConfig":
        """Build a config from three layers, weakest first: a base mapping
        (e.g. a configuration file section), then environment variables,
        then explicit overrides."""
        values = dict(base or {})
        env_map = {
            "provider": PROVIDER_ENV,
            "endpoint": ENDPOINT_ENV,
            "api_key": API_KEY_ENV,
            "model": MODEL_ENV,
        }
        for name, var in env_map.items():
            raw = os.environ.get(var)
            if raw:
                values[name] = raw
        values.setdefault("provider", "mock")
        values.update(overrides)
        allowed = {f.name for f in fields(GatewayConfig)}
        unknown = sorted(set(values) - allowed)
        if unknown:
            raise ValidationError(f"unknown gateway settings: {', '.join(unknown)}")
        return GatewayConfig(**values)


@dataclass(frozen=True)
class MockRule:
    """A reply keyed off a substring of the latest student message."""

    contains: str
    reply: str


@dataclass(frozen=True)
class MockScript:
    """Ordered scripted replies with optional predicate rules and a terminal reply."""

    replies: tuple[str, ...]
    terminal: str
    rules: tuple[MockRule, ...] = ()


def load_script(source) -> MockScript:
    """Parse and validate a mock script document (JSON object or path to one)."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = source
    if not isinstance(doc, dict):
        raise ScriptValidationError("mock script must be a JSON object")
    replies = doc.get("replies")
    if not isinstance(replies, list) or not replies:
        raise ScriptValidationError("mock script needs a non-empty 'replies' list")
    if not all(isinstance(r, str) and r.strip() for r in replies):
        raise ScriptValidationError("every scripted reply must be a non-empty string")
    terminal = doc.get("terminal")
    if not isinstance(terminal, str) or SENTINEL not in terminal:
        raise ScriptValidationError(
            f"mock script needs a 'terminal' reply containing {SENTINEL!r}"
        )
    rules = []
    for raw in doc.get("rules", ()):
        try:
            rules.append(MockRule(str(raw["contains"]), str(raw["reply"])))
        except (KeyError, TypeError):
            raise ScriptValidationError(
                "each rule needs 'contains' and 'reply' fields"
            ) from None
    return MockScript(replies=tuple(replies), terminal=terminal, rules=tuple(rules))


def _validate_history(history) -> list[ChatMessage]:
    messages = list(history)
    if not messages:
        raise ValidationError("completion history must not be empty")
    if messages[0].role != "system":
        raise ValidationError("completion history must start with the system message")
    return messages


class MockChatProvider:
    """Replays a script in order, with predicate rules taking precedence.

    Holds the position for one session; the caller creates one provider per
    tutoring journey.
    """

    def __init__(self, script: MockScript):
        self.script = script
        self.position = 0

    def complete(self, history) -> str:
        messages = _validate_history(history)
        latest_student = next(
            (m.content for m in reversed(messages) if m.role == "student"), None
        )
        if latest_student is not None:
            for rule in self.script.rules:
                if rule.contains in latest_student:
                    return rule.reply
        if self.position < len(self.script.replies):
            reply = self.script.replies[self.position]
            self.position += 1
            return reply
        return self.script.terminal


class HttpChatProvider:
    """Calls an OpenAI-style chat completions endpoint with retry and backoff."""

    def __init__(self, config: GatewayConfig):
        if not config.endpoint:
            raise ValidationError("live provider needs an endpoint (set "
                                  f"{ENDPOINT_ENV} or GatewayConfig.endpoint)")
        self.config = config

    def complete(self, history) -> str:
        messages = _validate_history(history)
        payload = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [
                {"role": _WIRE_ROLES[m.role], "content": m.content} for m in messages
            ],
        }
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        last_error = None
        for attempt in range(self.config.max_retries):
            if attempt:
                time.sleep(self.config.backoff_base * (2 ** (attempt - 1)))
            try:
                response = httpx.post(
                    self.config.endpoint,
                    json=payload,
                    headers=headers,
                    timeout=self.config.timeout,
                )
            except httpx.HTTPError as exc:
                last_error = exc
                logger.warning("completion attempt %d failed: %s", attempt + 1, exc)
                continue
            if response.status_code >= 500:
                last_error = RuntimeError(f"server returned {response.status_code}")
                logger.warning("completion attempt %d failed: %s", attempt + 1, last_error)
                continue
            if response.status_code >= 400:
                raise ProviderProtocolError(
                    f"provider rejected the request with {response.status_code}",
                    payload=response.text,
                )
            return _extract_reply(response)
        raise ProviderUnavailableError(
            f"completion failed after {self.config.max_retries} attempts: {last_error}"
        )


def _extract_reply(response) -> str:
    try:
        body = response.json()
        content = body["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError):
        raise ProviderProtocolError(
            "provider reply does not match the chat completion shape",
            payload=response.text,
        ) from None
    if not isinstance(content, str):
        raise ProviderProtocolError("provider reply content is not text", payload=body)
    return content


def make_provider(config: GatewayConfig, script: MockScript | None = None):
    """Build the provider the config asks for."""
    if config.provider == "mock":
        if script is None:
            if not config.script_path:
                raise ValidationError("mock provider needs a script or a script_path")
            script = load_script(config.script_path)
        return MockChatProvider(script)
    return HttpChatProvider(config)


def complete(history, config: GatewayConfig, provider=None) -> str:
    """One-shot completion using the configured provider.

    The history is read, never mutated; the reply text comes back verbatim.
    """
    active = provider if provider is not None else make_provider(config)
    return active.complete(history)


def bundled_demo_script() -> MockScript:
    """Load the demo conversation script packaged with the library."""
    from importlib import resources

    path = resources.files("tutorkit.data") / "demo_script.json"
    return load_script(json.loads(path.read_text(encoding="utf-8")))
