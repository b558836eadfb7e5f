"""Provider-agnostic chat-completion access with record/replay and retries.

Three providers share one interface:

* ``LiveProvider`` talks to any OpenAI-compatible chat-completions endpoint,
* ``ReplayProvider`` serves responses from a recorded transcript store, keyed
  by a digest of the request, so whole runs replay deterministically offline,
* ``RecordingProvider`` wraps a live provider and appends every exchange to a
  store so the run can be replayed later.

``complete_with_reparse`` re-issues a request when its output cannot be parsed,
bumping the attempt index so replays walk the same retry path.
"""

from __future__ import annotations

import hashlib
import json
import threading
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol

_ROLES = ("system", "user", "assistant")


class ProviderError(Exception):
    """Transport or HTTP failure while talking to a live endpoint."""


class ReplayMiss(KeyError):
    """No recorded transcript for the requested key and attempt."""


class ExhaustedRetries(Exception):
    """Every attempt produced unparseable output."""

    def __init__(self, message: str, last_error: Exception, raw_responses: list[str]):
        super().__init__(message)
        self.last_error = last_error
        self.raw_responses = raw_responses
        self.records: list[TranscriptRecord] = []


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in _ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if not self.content:
            raise ValueError("message content must be non-empty")


def system(content: str) -> ChatMessage:
    return ChatMessage("system", content)


def user(content: str) -> ChatMessage:
    return ChatMessage("user", content)


def assistant(content: str) -> ChatMessage:
    return ChatMessage("assistant", content)


@dataclass(frozen=True)
class CompletionParams:
    temperature: float
    model_name: str
    max_tokens: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} outside [0.0, 2.0]")


def transcript_key(messages: Iterable[ChatMessage], params: CompletionParams) -> str:
    """Digest of the ordered messages, the temperature rounded to one decimal,
    and the model name; the replay lookup key."""
    payload = {
        "messages": [[m.role, m.content] for m in messages],
        "temperature": f"{params.temperature:.1f}",
        "model": params.model_name,
    }
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass
class TranscriptRecord:
    key: str
    request: list[ChatMessage]
    params: CompletionParams
    response: str
    attempt_index: int = 0
    task: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "key": self.key,
            "request": [{"role": m.role, "content": m.content} for m in self.request],
            "params": {
                "temperature": self.params.temperature,
                "model_name": self.params.model_name,
                "max_tokens": self.params.max_tokens,
            },
            "response": self.response,
            "attempt_index": self.attempt_index,
            "task": self.task,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TranscriptRecord":
        params = CompletionParams(
            temperature=data["params"]["temperature"],
            model_name=data["params"]["model_name"],
            max_tokens=data["params"].get("max_tokens"),
        )
        return cls(
            key=data["key"],
            request=[ChatMessage(m["role"], m["content"]) for m in data["request"]],
            params=params,
            response=data["response"],
            attempt_index=data.get("attempt_index", 0),
            task=data.get("task"),
        )


class TranscriptStore:
    """Newline-delimited record file; concurrent reads, serialized appends."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._records: dict[tuple[str, int], TranscriptRecord] = {}
        self._order: list[TranscriptRecord] = []
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._insert(TranscriptRecord.from_dict(json.loads(line)))

    def _insert(self, record: TranscriptRecord) -> None:
        self._records[(record.key, record.attempt_index)] = record
        self._order.append(record)

    def append(self, record: TranscriptRecord) -> None:
        with self._lock:
            self._insert(record)
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as handle:
                    handle.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")

    def get(self, key: str, attempt_index: int = 0) -> TranscriptRecord | None:
        return self._records.get((key, attempt_index))

    def records(self) -> list[TranscriptRecord]:
        return list(self._order)

    def __len__(self) -> int:
        return len(self._order)


class Provider(Protocol):
    def complete(
        self,
        messages: list[ChatMessage],
        params: CompletionParams,
        attempt: int = 0,
        task: str | None = None,
    ) -> str: ...


class LiveProvider:
    """OpenAI-compatible chat completions over HTTP."""

    def __init__(self, endpoint: str, api_key: str = "", timeout: float = 60.0):
        if "/chat/completions" in endpoint:
            self.url = endpoint
        else:
            self.url = endpoint.rstrip("/") + "/chat/completions"
        self.api_key = api_key
        self.timeout = timeout

    def complete(
        self,
        messages: list[ChatMessage],
        params: CompletionParams,
        attempt: int = 0,
        task: str | None = None,
    ) -> str:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body: dict[str, Any] = {
            "model": params.model_name,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": params.temperature,
        }
        if params.max_tokens is not None:
            body["max_tokens"] = params.max_tokens
        try:
            response = requests.post(self.url, json=body, headers=headers, timeout=self.timeout)
        except requests.RequestException as exc:
            raise ProviderError(f"request to {self.url} failed: {exc}") from exc
        if response.status_code != 200:
            raise ProviderError(f"{self.url} returned HTTP {response.status_code}: {response.text[:500]}")
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise ProviderError(f"malformed completion payload: {exc}") from exc


class ReplayProvider:
    """Serves recorded responses; raises ReplayMiss on unknown requests."""

    def __init__(self, store: TranscriptStore):
        self.store = store

    def complete(
        self,
        messages: list[ChatMessage],
        params: CompletionParams,
        attempt: int = 0,
        task: str | None = None,
    ) -> str:
        key = transcript_key(messages, params)
        record = self.store.get(key, attempt)
        if record is None:
            raise ReplayMiss(f"no transcript for key {key[:12]}... attempt {attempt}")
        return record.response


class RecordingProvider:
    """Forwards to an inner provider and appends one record per completion."""

    def __init__(self, inner: Provider, store: TranscriptStore):
        self.inner = inner
        self.store = store

    def complete(
        self,
        messages: list[ChatMessage],
        params: CompletionParams,
        attempt: int = 0,
        task: str | None = None,
    ) -> str:
        response = self.inner.complete(messages, params, attempt=attempt, task=task)
        self.store.append(
            TranscriptRecord(
                key=transcript_key(messages, params),
                request=list(messages),
                params=params,
                response=response,
                attempt_index=attempt,
                task=task,
            )
        )
        return response


class StubProvider:
    """Test helper: a callable decides every response."""

    def __init__(self, fn: Callable[[list[ChatMessage], CompletionParams, int], str]):
        self.fn = fn
        self.calls: list[tuple[list[ChatMessage], CompletionParams, int]] = []

    def complete(
        self,
        messages: list[ChatMessage],
        params: CompletionParams,
        attempt: int = 0,
        task: str | None = None,
    ) -> str:
        self.calls.append((list(messages), params, attempt))
        return self.fn(messages, params, attempt)


@dataclass
class ReparseResult:
    value: Any
    response: str
    records: list[TranscriptRecord] = field(default_factory=list)


def complete_with_reparse(
    provider: Provider,
    messages: list[ChatMessage],
    params: CompletionParams,
    parse: Callable[[str], Any],
    max_attempts: int = 3,
    task: str | None = None,
) -> ReparseResult:
    """Complete and parse, re-issuing the request while parsing fails.

    The attempt index increments per retry so a replay store can hold distinct
    responses for each attempt. Raises ExhaustedRetries with every raw response
    attached once max_attempts is spent.
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    key = transcript_key(messages, params)
    records: list[TranscriptRecord] = []
    raw_responses: list[str] = []
    last_error: Exception | None = None
    for attempt in range(max_attempts):
        response = provider.complete(messages, params, attempt=attempt, task=task)
        records.append(
            TranscriptRecord(
                key=key,
                request=list(messages),
                params=params,
                response=response,
                attempt_index=attempt,
                task=task,
            )
        )
        raw_responses.append(response)
        try:
            value = parse(response)
        except Exception as exc:  # noqa: BLE001 - any parse failure triggers a retry
            last_error = exc
            continue
        return ReparseResult(value=value, response=response, records=records)
    error = ExhaustedRetries(
        f"no parseable output after {max_attempts} attempts: {last_error}",
        last_error if last_error is not None else ValueError("unparseable"),
        raw_responses,
    )
    error.records = records
    raise error
