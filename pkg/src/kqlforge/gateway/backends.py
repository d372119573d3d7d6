"""Chat-completion backends: live HTTP, replay fixtures, and scriptable mocks.

Every backend implements ``complete(request) -> CompletionResponse`` and is
safe to call from concurrent workers.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from ..errors import (
    AuthenticationError,
    ConfigurationError,
    RetryExhaustedError,
    TransportError,
    UnrecordedRequestError,
)
from ..prompts import estimate_tokens

LIVE = "live"
REPLAY = "replay"
MOCK = "mock"


@dataclass(frozen=True)
class CompletionRequest:
    model_id: str
    prompt: str
    temperature: float = 1.0
    max_output_tokens: int = 1024
    request_tag: str = ""


@dataclass(frozen=True)
class CompletionResponse:
    text: str
    input_tokens: int
    output_tokens: int
    latency_seconds: float
    backend_kind: str
    model_id: str
    usage_estimated: bool = False
    request_tag: str = ""

    def to_json_dict(self) -> dict:
        return {
            "text": self.text,
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
            "latency_seconds": self.latency_seconds,
            "backend_kind": self.backend_kind,
            "model_id": self.model_id,
            "usage_estimated": self.usage_estimated,
            "request_tag": self.request_tag,
        }


def prompt_sha256(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class MockBackend:
    """Scripted backend for tests and demos.

    ``responder`` is either a list of texts consumed in order or a callable
    mapping a CompletionRequest to the reply text. Token counts are
    estimated with the same heuristic the prompt builder uses.
    """

    backend_kind = MOCK

    def __init__(self, responder, latency_seconds: float = 0.0):
        self._lock = threading.Lock()
        self.latency_seconds = latency_seconds
        if callable(responder):
            self._responder = responder
            self._queue = None
        else:
            self._queue = list(responder)
            self._responder = None
        self.calls: list[CompletionRequest] = []

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        if not request.prompt:
            raise ValueError("prompt must be non-empty")
        with self._lock:
            self.calls.append(request)
            if self._responder is not None:
                text = self._responder(request)
            else:
                if not self._queue:
                    raise ConfigurationError("mock backend script exhausted")
                text = self._queue.pop(0)
        return CompletionResponse(
            text=text,
            input_tokens=estimate_tokens(request.prompt),
            output_tokens=estimate_tokens(text) if text else 0,
            latency_seconds=self.latency_seconds,
            backend_kind=MOCK,
            model_id=request.model_id,
            usage_estimated=True,
            request_tag=request.request_tag,
        )


class ReplayBackend:
    """Replays recorded responses keyed on (model, prompt hash, temperature)."""

    backend_kind = REPLAY

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._responses: dict[tuple[str, str, float], dict] = {}
        with open(self.path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                key = record["key"]
                self._responses[
                    (key["model"], key["prompt_sha256"], float(key["temperature"]))
                ] = record["response"]

    def __len__(self) -> int:
        return len(self._responses)

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        key = (request.model_id, prompt_sha256(request.prompt), float(request.temperature))
        recorded = self._responses.get(key)
        if recorded is None:
            raise UnrecordedRequestError(*key)
        return CompletionResponse(
            text=recorded["text"],
            input_tokens=int(recorded["input_tokens"]),
            output_tokens=int(recorded["output_tokens"]),
            latency_seconds=float(recorded["latency_seconds"]),
            backend_kind=REPLAY,
            model_id=request.model_id,
            usage_estimated=bool(recorded.get("usage_estimated", False)),
            request_tag=request.request_tag,
        )


class RecordingBackend:
    """Wraps another backend and appends replay fixture lines as it goes.

    Repeated requests with an identical key are recorded once.
    """

    def __init__(self, inner, path: str | Path):
        self.inner = inner
        self.backend_kind = inner.backend_kind
        self.path = Path(path)
        self._lock = threading.Lock()
        self._seen: set[tuple[str, str, float]] = set()

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        response = self.inner.complete(request)
        key = (request.model_id, prompt_sha256(request.prompt), float(request.temperature))
        with self._lock:
            if key not in self._seen:
                self._seen.add(key)
                record = {
                    "key": {
                        "model": key[0],
                        "prompt_sha256": key[1],
                        "temperature": key[2],
                    },
                    "response": {
                        "text": response.text,
                        "input_tokens": response.input_tokens,
                        "output_tokens": response.output_tokens,
                        "latency_seconds": response.latency_seconds,
                        "usage_estimated": response.usage_estimated,
                    },
                }
                with open(self.path, "a", encoding="utf-8") as handle:
                    handle.write(json.dumps(record, sort_keys=True) + "\n")
        return response


class LiveBackend:
    """JSON-over-HTTP chat-completion client with retry and backoff.

    Transient transport failures are retried up to ``max_attempts`` with
    exponential backoff; authentication failures are not retried. When the
    provider omits usage counts the response falls back to the token
    estimate and is flagged ``usage_estimated``.
    """

    backend_kind = LIVE

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        max_attempts: int = 3,
        backoff_base: float = 0.5,
        max_in_flight: int = 4,
        transport=None,
        sleep=time.sleep,
    ):
        self.endpoint = endpoint
        self.api_key = api_key
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self._gate = threading.BoundedSemaphore(max_in_flight)
        self._transport = transport or self._post
        self._sleep = sleep

    def _post(self, payload: dict) -> dict:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = requests.post(self.endpoint, json=payload, headers=headers, timeout=120)
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if response.status_code in (401, 403):
            raise AuthenticationError(f"authentication failed ({response.status_code})")
        if response.status_code >= 500 or response.status_code == 429:
            raise TransportError(f"server error {response.status_code}")
        response.raise_for_status()
        return response.json()

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        if not request.prompt:
            raise ValueError("prompt must be non-empty")
        payload = {
            "model": request.model_id,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        attempt = 0
        started = time.monotonic()
        while True:
            attempt += 1
            try:
                with self._gate:
                    data = self._transport(payload)
                break
            except AuthenticationError:
                raise
            except TransportError as exc:
                if attempt >= self.max_attempts:
                    raise RetryExhaustedError(attempts=attempt, cause=exc)
                self._sleep(self.backoff_base * (2 ** (attempt - 1)))
        latency = time.monotonic() - started
        text = data["choices"][0]["message"]["content"]
        usage = data.get("usage") or {}
        estimated = "prompt_tokens" not in usage or "completion_tokens" not in usage
        return CompletionResponse(
            text=text,
            input_tokens=int(usage.get("prompt_tokens", estimate_tokens(request.prompt))),
            output_tokens=int(usage.get("completion_tokens", estimate_tokens(text))),
            latency_seconds=latency,
            backend_kind=LIVE,
            model_id=request.model_id,
            usage_estimated=estimated,
            request_tag=request.request_tag,
        )


def echo_backend(pairs: list[dict], latency_seconds: float = 0.0) -> MockBackend:
    """Mock backend that answers any prompt with the gold query whose NLQ
    appears verbatim in the prompt. Longest NLQ match wins."""

    ordered = sorted(pairs, key=lambda p: len(p["nlq"]), reverse=True)

    def responder(request: CompletionRequest) -> str:
        for pair in ordered:
            if pair["nlq"] in request.prompt:
                return pair["kql"]
        raise ConfigurationError("echo backend: no dataset NLQ found in prompt")

    return MockBackend(responder, latency_seconds=latency_seconds)
