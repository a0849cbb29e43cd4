"""Provider-abstracted LLM access with structured outputs and record/replay.

Three modes:

* ``live``    call the provider, nothing persisted.
* ``record``  call the provider and persist (key -> response) as a
              content-addressed JSON file, atomically.
* ``replay``  serve exclusively from the cache; no network traffic.

The cache key is a stable hash of (model id, prompt, schema id), so a
replayed pipeline run is bit-identical across executions.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import jsonschema

from .errors import CacheMiss, GatewayExhausted, SchemaViolation

log = logging.getLogger(__name__)

MODE_LIVE = "live"
MODE_RECORD = "record"
MODE_REPLAY = "replay"

BACKOFF_BASE = 1.0
BACKOFF_FACTOR = 2.0
BACKOFF_JITTER = 0.2
MAX_ATTEMPTS = 5

SCHEMAS: dict[str, dict] = {
    "explanation": {
        "type": "object",
        "properties": {
            "problem": {"type": "string"},
            "causal_chain": {"type": "string"},
            "suggested_actions": {"type": "string"},
        },
        "required": ["problem", "causal_chain", "suggested_actions"],
    },
    "judge": {
        "type": "object",
        "properties": {
            "c2": {"type": "boolean"},
            "c3": {"type": "boolean"},
            "c4": {"type": "boolean"},
            "c6": {"type": "boolean"},
            "justifications": {"type": "object"},
        },
        "required": ["c2", "c3", "c4", "c6", "justifications"],
    },
    "fix": {
        "type": "object",
        "properties": {"function": {"type": "string"}},
        "required": ["function"],
    },
}

_FENCE = re.compile(r"^```[a-zA-Z]*\n|\n```$")


@dataclass(frozen=True)
class CompletionRequest:
    model: str
    prompt: str
    schema_id: str
    temperature: float = 0.0
    max_retries: int = MAX_ATTEMPTS

    def cache_key(self) -> str:
        payload = json.dumps(
            {"model": self.model, "prompt": self.prompt, "schema": self.schema_id},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass
class StructuredResponse:
    parsed: dict
    raw_text: str
    attempts: int
    served_from: str
    usage: dict = field(default_factory=dict)


class TransientProviderError(Exception):
    """Raised by providers for retryable failures (rate limits, 5xx)."""


def parse_structured(raw_text: str, schema_id: str) -> dict:
    """Parse and schema-validate a raw model response; raises SchemaViolation."""
    text = _FENCE.sub("", raw_text.strip()).strip()
    if not text.startswith("{"):
        start, end = text.find("{"), text.rfind("}")
        if start == -1 or end <= start:
            raise SchemaViolation(f"no JSON object in response: {raw_text[:80]!r}")
        text = text[start : end + 1]
    try:
        parsed = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"response is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(parsed, SCHEMAS[schema_id])
    except jsonschema.ValidationError as exc:
        raise SchemaViolation(f"response violates schema {schema_id!r}: {exc.message}") from exc
    return parsed


class ReplayCache:
    """Content-addressed JSON files, one per request key, written atomically."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def __contains__(self, key: str) -> bool:
        return self._path(key).is_file()

    def load(self, key: str) -> dict:
        path = self._path(key)
        if not path.is_file():
            raise CacheMiss(key)
        return json.loads(path.read_text())

    def store(self, key: str, entry: dict) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        tmp = self._path(key).with_suffix(".tmp")
        tmp.write_text(json.dumps(entry, sort_keys=True, indent=1))
        os.replace(tmp, self._path(key))


def backoff_delays(attempts: int, rng: random.Random) -> list[float]:
    """Exponential delays with bounded jitter; monotone nondecreasing."""
    delays = []
    for i in range(attempts):
        jitter = 1.0 + rng.uniform(-BACKOFF_JITTER, BACKOFF_JITTER)
        delays.append(BACKOFF_BASE * (BACKOFF_FACTOR**i) * jitter)
    return delays


class Gateway:
    """Completion front end: retry, schema enforcement, record/replay."""

    def __init__(
        self,
        provider: Optional[Callable[[CompletionRequest], tuple[str, dict]]] = None,
        mode: str = MODE_LIVE,
        cache_dir: Optional[Path] = None,
        sleep: Callable[[float], None] = time.sleep,
        rng: Optional[random.Random] = None,
        rate_limit: Optional[float] = None,
        clock: Callable[[], float] = time.monotonic,
    ):
        if mode not in (MODE_LIVE, MODE_RECORD, MODE_REPLAY):
            raise ValueError(f"unknown gateway mode {mode!r}")
        if mode == MODE_REPLAY and cache_dir is None:
            raise ValueError("replay mode requires a cache directory")
        if mode != MODE_REPLAY and provider is None:
            raise ValueError(f"{mode} mode requires a provider")
        if rate_limit is not None and rate_limit <= 0:
            raise ValueError("rate_limit must be positive (requests per second)")
        self.provider = provider
        self.mode = mode
        self.cache = ReplayCache(cache_dir) if cache_dir is not None else None
        self.sleep = sleep
        self.rng = rng or random.Random()
        self.rate_limit = rate_limit
        self.clock = clock
        self._rate_lock = threading.Lock()
        self._next_slot = 0.0

    def _throttle(self) -> None:
        if self.rate_limit is None:
            return
        with self._rate_lock:
            now = self.clock()
            wait = self._next_slot - now
            self._next_slot = max(now, self._next_slot) + 1.0 / self.rate_limit
        if wait > 0:
            self.sleep(wait)

    def complete(self, request: CompletionRequest) -> StructuredResponse:
        key = request.cache_key()
        if self.mode == MODE_REPLAY:
            entry = self.cache.load(key)
            return StructuredResponse(
                parsed=parse_structured(entry["raw_text"], request.schema_id),
                raw_text=entry["raw_text"],
                attempts=0,
                served_from="replay",
                usage=entry.get("usage", {}),
            )

        delays = backoff_delays(request.max_retries, self.rng)
        last_error: Exception | None = None
        for attempt in range(1, request.max_retries + 1):
            try:
                self._throttle()
                raw_text, usage = self.provider(request)
                parsed = parse_structured(raw_text, request.schema_id)
            except (TransientProviderError, SchemaViolation) as exc:
                last_error = exc
                log.debug("attempt %d/%d failed: %s", attempt, request.max_retries, exc)
                if attempt < request.max_retries:
                    self.sleep(delays[attempt - 1])
                continue
            if self.mode == MODE_RECORD:
                self.cache.store(key, {"raw_text": raw_text, "usage": usage})
            return StructuredResponse(
                parsed=parsed,
                raw_text=raw_text,
                attempts=attempt,
                served_from="live",
                usage=usage,
            )
        raise GatewayExhausted(
            f"{request.max_retries} attempts failed for model {request.model}: {last_error}"
        )


def http_provider(base_url: str, api_key_env: str, settings: Optional[dict] = None):
    """OpenAI-compatible chat-completions provider over HTTP.

    ``settings`` carries per-model reasoning/temperature overrides from the
    config file; credentials come from the named environment variable.
    """
    import httpx

    settings = settings or {}

    def call(request: CompletionRequest) -> tuple[str, dict]:
        key = os.environ.get(api_key_env, "")
        if not key:
            raise GatewayExhausted(f"no credentials in ${api_key_env}")
        body = {
            "model": request.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": settings.get("temperature", request.temperature),
            "response_format": {"type": "json_object"},
        }
        body.update(settings.get("extra", {}))
        try:
            resp = httpx.post(
                f"{base_url.rstrip('/')}/chat/completions",
                headers={"Authorization": f"Bearer {key}"},
                json=body,
                timeout=120.0,
            )
        except httpx.TransportError as exc:
            raise TransientProviderError(str(exc)) from exc
        if resp.status_code in (429, 500, 502, 503, 504):
            raise TransientProviderError(f"HTTP {resp.status_code}")
        resp.raise_for_status()
        data = resp.json()
        return data["choices"][0]["message"]["content"], data.get("usage", {})

    return call
