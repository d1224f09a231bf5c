"""Chat-completion gateway: remote providers plus a scripted mock.

The scripted mock drives every test and transcript replay; remote
providers share one retry/audit path.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import requests


class GatewayError(Exception):
    """Unrecoverable gateway failure (auth, exhausted retries, bad script)."""


class ScriptExhausted(GatewayError):
    pass


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"bad role {self.role!r}")
        if not self.content:
            raise ValueError("empty message content")


PROVIDERS = ("openai_style", "anthropic_style", "fireworks_style", "mock")


@dataclass
class ModelConfig:
    provider: str = "mock"  # one of PROVIDERS
    model_id: str = "scripted"
    temperature: float = 0.0
    max_tokens: int = 4096
    api_base: str = ""
    credentials_env: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.provider not in PROVIDERS:
            raise ValueError(f"unknown provider {self.provider!r}; expected one of {PROVIDERS}")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


class ScriptedLLM:
    """Deterministic completion source: pops a fixed list of responses.

    Single-consumer; one script instance per run.
    """

    def __init__(self, responses: list[str]):
        self._responses = list(responses)
        self.calls: list[list[ChatMessage]] = []

    def next_response(self, messages: list[ChatMessage]) -> str:
        self.calls.append(list(messages))
        if not self._responses:
            raise ScriptExhausted("script exhausted")
        return self._responses.pop(0)

    def remaining(self) -> int:
        return len(self._responses)


class LLMGateway:
    """Uniform completion interface with retry and a per-call audit trail."""

    def __init__(
        self,
        config: ModelConfig,
        script: ScriptedLLM | None = None,
        audit_path: str | Path | None = None,
        transport: Callable[[dict], str] | None = None,
        retries: int = 3,
        backoff_s: float = 1.0,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.time,
    ):
        if config.provider == "mock" and script is None:
            raise ValueError("mock provider requires a script")
        self.config = config
        self.script = script
        self.audit_records: list[dict] = []
        self._audit_path = Path(audit_path) if audit_path else None
        self._transport = transport
        self._retries = retries
        self._backoff_s = backoff_s
        self._sleep = sleep
        self._clock = clock

    def complete_chat(self, messages: list[ChatMessage]) -> str:
        if not messages:
            raise ValueError("messages must be non-empty")
        if messages[0].role != "system":
            raise ValueError("first message must be the system prompt")
        started = self._clock()
        try:
            if self.config.provider == "mock":
                assert self.script is not None
                text = self.script.next_response(messages)
            else:
                text = self._complete_remote(messages)
        except Exception as exc:
            self._audit(messages, error=str(exc), started=started)
            raise
        self._audit(messages, completion=text, started=started)
        return text

    def _complete_remote(self, messages: list[ChatMessage]) -> str:
        payload = {
            "model": self.config.model_id,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
        }
        send = self._transport or self._http_transport
        last: Exception | None = None
        for attempt in range(self._retries):
            try:
                return send(payload)
            except GatewayError:
                raise  # non-retryable (auth and friends)
            except Exception as exc:
                last = exc
                if attempt + 1 < self._retries:
                    self._sleep(self._backoff_s * (2**attempt))
        raise GatewayError(f"gateway failed after {self._retries} attempts: {last}")

    def _http_transport(self, payload: dict) -> str:
        key = os.environ.get(self.config.credentials_env, "") if self.config.credentials_env else ""
        if not key:
            raise GatewayError(
                f"missing credentials: set ${self.config.credentials_env or 'API key env var'}"
            )
        if self.config.provider == "anthropic_style":
            url = (self.config.api_base or "https://api.anthropic.com") + "/v1/messages"
            headers = {"x-api-key": key, "anthropic-version": "2023-06-01"}
            body = dict(payload)
            system = body["messages"][0]["content"]
            body["messages"] = body["messages"][1:]
            body["system"] = system
            resp = requests.post(url, json=body, headers=headers, timeout=120)
            if resp.status_code in (401, 403):
                raise GatewayError(f"auth failure: {resp.status_code}")
            resp.raise_for_status()
            return resp.json()["content"][0]["text"]
        # openai_style and fireworks_style share the chat/completions shape.
        base = self.config.api_base or "https://api.openai.com/v1"
        resp = requests.post(
            base.rstrip("/") + "/chat/completions",
            json=payload,
            headers={"Authorization": f"Bearer {key}"},
            timeout=120,
        )
        if resp.status_code in (401, 403):
            raise GatewayError(f"auth failure: {resp.status_code}")
        resp.raise_for_status()
        return resp.json()["choices"][0]["message"]["content"]

    def _audit(
        self,
        messages: list[ChatMessage],
        completion: str | None = None,
        error: str | None = None,
        started: float = 0.0,
    ) -> None:
        record = {
            "timestamp": started,
            "model_id": self.config.model_id,
            "provider": self.config.provider,
            "n_messages": len(messages),
            "prompt_chars": sum(len(m.content) for m in messages),
            "completion_chars": len(completion) if completion is not None else None,
            "latency_s": round(self._clock() - started, 6),
            "error": error,
        }
        self.audit_records.append(record)
        if self._audit_path:
            with self._audit_path.open("a") as fh:
                fh.write(json.dumps(record) + "\n")


def scripted_gateway(responses: list[str], **kwargs) -> LLMGateway:
    """Convenience constructor for test and replay gateways."""
    return LLMGateway(ModelConfig(provider="mock"), script=ScriptedLLM(responses), **kwargs)
