"""Model access: chat requests, a content-addressed transcript cache, and backends.

Every model call in the package goes through :class:`Gateway`. A request is
hashed together with the backend settings; if the cache already holds that
hash the stored response is returned and no backend is contacted. In
replay-only mode a missing entry raises :class:`CacheMiss` instead.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Optional, Protocol

from entail_eval.errors import (
    AuthError,
    CacheFormatError,
    CacheMiss,
    ConfigError,
    GatewayError,
    NetworkError,
    ValidationError,
)
from entail_eval.model import BackendConfig

logger = logging.getLogger(__name__)

ROLES = ("system", "user", "assistant")
TRANSCRIPT_FIELDS = (
    "key",
    "backend_id",
    "model_name",
    "seed",
    "temperature",
    "max_tokens",
    "messages",
    "response_text",
    "created_at",
)


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValidationError(f"unknown message role {self.role!r}")

    def to_dict(self) -> dict:
        return {"role": self.role, "content": self.content}


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[Message, ...]
    config: BackendConfig

    def __post_init__(self) -> None:
        object.__setattr__(self, "messages", tuple(self.messages))
        if not self.messages:
            raise ValidationError("a chat request needs at least one message")
        if self.messages[-1].role != "user":
            raise ValidationError("the last message of a chat request must come from the user")

    @classmethod
    def single(cls, prompt: str, config: BackendConfig) -> "ChatRequest":
        return cls((Message("user", prompt),), config)

    def followup(self, assistant_text: str, prompt: str) -> "ChatRequest":
        """Continue this conversation with the assistant's reply and a new user turn."""
        return replace(
            self,
            messages=self.messages + (Message("assistant", assistant_text), Message("user", prompt)),
        )

    @property
    def key(self) -> str:
        return cache_key(self.config, self.messages)


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode(
        "utf-8"
    )


def cache_key(config: BackendConfig, messages: Iterable[Message]) -> str:
    """SHA-256 over the canonical JSON of the backend settings and messages."""
    payload = {
        "backend_id": config.backend_id,
        "model_name": config.model_name,
        "seed": config.seed,
        "temperature": float(config.temperature),
        "max_tokens": config.max_tokens,
        "messages": [m.to_dict() for m in messages],
    }
    return hashlib.sha256(_canonical(payload)).hexdigest()


@dataclass(frozen=True)
class Transcript:
    key: str
    backend_id: str
    model_name: str
    seed: int
    temperature: float
    max_tokens: int
    messages: tuple[Message, ...]
    response_text: str
    created_at: str

    @classmethod
    def record(cls, request: ChatRequest, response_text: str) -> "Transcript":
        cfg = request.config
        return cls(
            key=request.key,
            backend_id=cfg.backend_id,
            model_name=cfg.model_name,
            seed=cfg.seed,
            temperature=float(cfg.temperature),
            max_tokens=cfg.max_tokens,
            messages=request.messages,
            response_text=response_text,
            created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )

    def to_dict(self) -> dict:
        return {
            "key": self.key,
            "backend_id": self.backend_id,
            "model_name": self.model_name,
            "seed": self.seed,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "messages": [m.to_dict() for m in self.messages],
            "response_text": self.response_text,
            "created_at": self.created_at,
        }

    def to_line(self) -> str:
        return _canonical(self.to_dict()).decode("utf-8")

    @classmethod
    def from_dict(cls, data: dict) -> "Transcript":
        missing = [f for f in TRANSCRIPT_FIELDS if f not in data]
        if missing:
            raise ValueError(f"missing fields: {', '.join(missing)}")
        messages = tuple(Message(m["role"], m["content"]) for m in data["messages"])
        transcript = cls(
            key=data["key"],
            backend_id=data["backend_id"],
            model_name=data["model_name"],
            seed=int(data["seed"]),
            temperature=float(data["temperature"]),
            max_tokens=int(data["max_tokens"]),
            messages=messages,
            response_text=data["response_text"],
            created_at=data["created_at"],
        )
        if not isinstance(transcript.response_text, str):
            raise ValueError("response_text must be a string")
        expected = cache_key(
            BackendConfig(
                backend_id=transcript.backend_id,
                model_name=transcript.model_name,
                seed=transcript.seed,
                temperature=transcript.temperature,
                max_tokens=transcript.max_tokens,
            ),
            messages,
        )
        if expected != transcript.key:
            raise ValueError(f"key {transcript.key} does not match content hash {expected}")
        return transcript


class TranscriptCache:
    """In-memory transcript store, optionally backed by an append-only JSONL file.

    A cache with a path loads that file on construction and appends each new
    transcript as one line. Appends happen under a lock (thread and file level),
    so concurrent writers never interleave partial lines.
    """

    def __init__(self, path: Optional[str | os.PathLike] = None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[str, Transcript] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            for transcript in _read_transcripts(self.path):
                self._entries.setdefault(transcript.key, transcript)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def get(self, key: str) -> Optional[Transcript]:
        return self._entries.get(key)

    def keys(self) -> list[str]:
        return sorted(self._entries)

    def put(self, transcript: Transcript) -> bool:
        """Store a transcript. Returns False if the key was already present."""
        with self._lock:
            if transcript.key in self._entries:
                return False
            if self.path is not None:
                self._append([transcript])
            self._entries[transcript.key] = transcript
            return True

    def _append(self, transcripts: list[Transcript]) -> None:
        from filelock import FileLock

        self.path.parent.mkdir(parents=True, exist_ok=True)
        payload = "".join(t.to_line() + "\n" for t in transcripts)
        with FileLock(str(self.path) + ".lock"):
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(payload)
                fh.flush()
                os.fsync(fh.fileno())

    def export(self, path: str | os.PathLike) -> int:
        """Write every transcript, sorted by key, to ``path``. Returns the count."""
        path = Path(path)
        entries = [self._entries[k] for k in self.keys()]
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            for transcript in entries:
                fh.write(transcript.to_line() + "\n")
        os.replace(tmp, path)
        return len(entries)

    def import_file(self, path: str | os.PathLike) -> int:
        """Add every transcript in ``path`` not already cached. Returns the number added.

        The whole file is validated before anything is added; one bad line
        rejects the file.
        """
        transcripts = _read_transcripts(Path(path))
        with self._lock:
            new: dict[str, Transcript] = {}
            for t in transcripts:
                if t.key not in self._entries and t.key not in new:
                    new[t.key] = t
            if new and self.path is not None:
                self._append(list(new.values()))
            self._entries.update(new)
        return len(new)


def _read_transcripts(path: Path) -> list[Transcript]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                if not isinstance(data, dict):
                    raise ValueError("line is not a JSON object")
                out.append(Transcript.from_dict(data))
            except (ValueError, KeyError, TypeError) as exc:
                raise CacheFormatError(path, line_no, str(exc)) from exc
    return out


class Backend(Protocol):
    def send(self, request: ChatRequest) -> str: ...


class OpenAIChatBackend:
    """Client for an OpenAI-compatible ``/chat/completions`` endpoint."""

    def __init__(self, config: BackendConfig, client=None):
        import httpx

        self.config = config
        self._client = client or httpx.Client(timeout=config.timeout)
        self._httpx = httpx

    def _api_key(self) -> str:
        key = os.environ.get(self.config.api_key_env, "").strip()
        if not key:
            raise AuthError(f"environment variable {self.config.api_key_env} is not set")
        return key

    def send(self, request: ChatRequest) -> str:
        cfg = request.config
        body = {
            "model": cfg.model_name,
            "messages": [m.to_dict() for m in request.messages],
            "seed": cfg.seed,
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
        }
        headers = {"Authorization": f"Bearer {self._api_key()}"}
        try:
            resp = self._client.post(cfg.endpoint, json=body, headers=headers)
        except self._httpx.TransportError as exc:
            raise NetworkError(f"transport error: {exc}") from exc
        if resp.status_code in (401, 403):
            raise AuthError(f"backend rejected credentials (HTTP {resp.status_code})")
        if resp.status_code == 429 or resp.status_code >= 500:
            raise NetworkError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        if resp.status_code >= 400:
            raise GatewayError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"malformed completion payload: {exc}") from exc


class ReplayBackend:
    """Backend that never answers; used for replay-only runs."""

    def send(self, request: ChatRequest) -> str:
        raise CacheMiss(request.key)


class FunctionBackend:
    """Wrap a plain callable ``request -> str`` as a backend (scripted runs, tests)."""

    def __init__(self, fn: Callable[[ChatRequest], str]):
        self.fn = fn

    def send(self, request: ChatRequest) -> str:
        return self.fn(request)


class Gateway:
    """Single entry point for model calls: cache lookup, retries, recording.

    Identical concurrent requests are collapsed into one backend call.
    At most ``max_concurrency`` backend calls are in flight at once.
    """

    def __init__(
        self,
        backend: Backend,
        cache: Optional[TranscriptCache] = None,
        *,
        replay_only: bool = False,
        max_attempts: int = 5,
        backoff: float = 1.0,
        max_backoff: float = 30.0,
        max_concurrency: int = 8,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if max_attempts < 1:
            raise ConfigError("max_attempts must be >= 1")
        self.backend = ReplayBackend() if replay_only else backend
        self.cache = cache if cache is not None else TranscriptCache()
        self.replay_only = replay_only
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.max_backoff = max_backoff
        self._sleep = sleep
        self._slots = threading.BoundedSemaphore(max_concurrency)
        self._key_locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()
        self.hits = 0
        self.misses = 0

    def _lock_for(self, key: str) -> threading.Lock:
        with self._guard:
            return self._key_locks.setdefault(key, threading.Lock())

    def _count(self, hit: bool) -> None:
        with self._guard:
            if hit:
                self.hits += 1
            else:
                self.misses += 1

    def call(self, request: ChatRequest) -> Transcript:
        key = request.key
        with self._lock_for(key):
            cached = self.cache.get(key)
            if cached is not None:
                self._count(True)
                return cached
            self._count(False)
            text = self._send_with_retry(request)
            transcript = Transcript.record(request, text)
            self.cache.put(transcript)
            return transcript

    def complete(self, request: ChatRequest) -> str:
        return self.call(request).response_text

    def _send_with_retry(self, request: ChatRequest) -> str:
        delay = self.backoff
        for attempt in range(1, self.max_attempts + 1):
            try:
                with self._slots:
                    return self.backend.send(request)
            except NetworkError as exc:
                if attempt == self.max_attempts:
                    raise
                logger.warning(
                    "attempt %d/%d failed: %s; retrying in %.1fs",
                    attempt,
                    self.max_attempts,
                    exc,
                    delay,
                )
                self._sleep(delay)
                delay = min(delay * 2, self.max_backoff)
        raise AssertionError("unreachable")

    def stats(self) -> dict:
        return {"hits": self.hits, "misses": self.misses, "entries": len(self.cache)}


def make_gateway(
    config: BackendConfig,
    cache_path: Optional[str | os.PathLike] = None,
    *,
    replay_only: bool = False,
    max_concurrency: int = 8,
) -> Gateway:
    cache = TranscriptCache(cache_path)
    if replay_only:
        backend: Backend = ReplayBackend()
    elif config.backend_id == "openai":
        backend = OpenAIChatBackend(config)
    else:
        raise ConfigError(
            f"unknown backend {config.backend_id!r}; only 'openai' (any "
            "OpenAI-compatible endpoint) is supported for live calls"
        )
    return Gateway(backend, cache, replay_only=replay_only, max_concurrency=max_concurrency)
