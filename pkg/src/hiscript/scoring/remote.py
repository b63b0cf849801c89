"""JSON-over-HTTP client for a remote scoring service.

All endpoints are POST:

    /v1/embed       {"texts": [str]}                        -> {"vectors": [[num]]}
    /v1/nsp         {"pairs": [[str, str]]}                 -> {"probs": [num]}
    /v1/perplexity  {"texts": [str]}                        -> {"ppl": [num]}
    /v1/generate    {"prompt": str, "max_tokens": int,
                     "seed": int|null}                      -> {"text": str}

Errors come back as ``{"error": {"code": str, "message": str}}`` with a
4xx/5xx status.  5xx, timeouts and connection failures are retried with
exponential backoff; 4xx is not.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
import uuid
from pathlib import Path
from typing import Sequence

import httpx
import numpy as np

from ..errors import BackendError, ValidationError
from .base import BackendConfig, check_texts

log = logging.getLogger(__name__)


class ResponseCache:
    """On-disk cache keyed by endpoint and canonical request payload."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, path: str, payload: dict) -> Path:
        key = json.dumps([path, payload], sort_keys=True, ensure_ascii=False)
        return self.root / (hashlib.sha256(key.encode("utf-8")).hexdigest() + ".json")

    def get(self, path, payload):
        p = self._path(path, payload)
        if p.exists():
            return json.loads(p.read_text(encoding="utf-8"))
        return None

    def put(self, path, payload, body) -> None:
        p = self._path(path, payload)
        tmp = p.with_suffix(f".{uuid.uuid4().hex}.tmp")
        tmp.write_text(json.dumps(body, ensure_ascii=False), encoding="utf-8")
        tmp.replace(p)


class RemoteBackend:
    kind = "remote"

    def __init__(self, config: BackendConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self.base = config.endpoint.rstrip("/")
        self._client = httpx.Client(timeout=config.timeout / 1000.0, transport=transport)
        self._slots = threading.BoundedSemaphore(config.max_in_flight)
        self.cache = ResponseCache(config.cache_dir) if config.cache_dir else None

    @property
    def name(self) -> str:
        return f"remote:{self.base}"

    def close(self) -> None:
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _post(self, path: str, payload: dict, cacheable: bool = True) -> dict:
        if cacheable and self.cache is not None:
            hit = self.cache.get(path, payload)
            if hit is not None:
                return hit
        ids = []
        delay = self.config.backoff
        last = None
        for attempt in range(self.config.max_retries + 1):
            rid = uuid.uuid4().hex
            ids.append(rid)
            try:
                with self._slots:
                    resp = self._client.post(self.base + path, json=payload, headers={"X-Request-Id": rid})
            except (httpx.TimeoutException, httpx.TransportError) as exc:
                last = BackendError(f"{path}: {exc!r}", "UNAVAILABLE", retryable=True, request_ids=ids)
            else:
                if resp.status_code < 400:
                    try:
                        body = resp.json()
                    except ValueError as exc:
                        raise BackendError(f"{path}: response is not JSON", "BAD_RESPONSE", request_ids=ids) from exc
                    if cacheable and self.cache is not None:
                        self.cache.put(path, payload, body)
                    return body
                code, message = _error_envelope(resp)
                if resp.status_code < 500:
                    raise BackendError(f"{path}: {code}: {message}", code, request_ids=ids, status=resp.status_code)
                last = BackendError(f"{path}: {code}: {message}", code, retryable=True,
                                    request_ids=ids, status=resp.status_code)
            if attempt < self.config.max_retries:
                log.info("retrying %s after %s (attempt %d)", path, last.code, attempt + 1)
                time.sleep(delay)
                delay *= 2
        last.request_ids = ids
        raise last

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        texts = check_texts(texts)
        if not texts:
            return np.zeros((0, 0))
        body = self._post("/v1/embed", {"texts": texts})
        vecs = _field(body, "vectors", len(texts))
        arr = np.asarray(vecs, dtype=float)
        if arr.ndim != 2 or not np.all(np.isfinite(arr)):
            raise BackendError("/v1/embed: vectors must be a finite 2-D array", "BAD_RESPONSE")
        return arr

    def next_sentence_prob(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        pairs = [(a, b) for a, b in pairs]
        check_texts([x for p in pairs for x in p])
        if not pairs:
            return []
        body = self._post("/v1/nsp", {"pairs": [list(p) for p in pairs]})
        return [float(x) for x in _field(body, "probs", len(pairs))]

    def perplexity(self, texts: Sequence[str]) -> list[float]:
        texts = check_texts(texts)
        if not texts:
            return []
        body = self._post("/v1/perplexity", {"texts": texts})
        return [float(x) for x in _field(body, "ppl", len(texts))]

    def generate(self, prompt: str, max_tokens: int = 256, seed: int | None = None, **extra) -> str:
        if not prompt or not prompt.strip():
            raise ValidationError("prompt is empty", "EMPTY_PROMPT")
        payload = {"prompt": prompt, "max_tokens": int(max_tokens), "seed": seed, **extra}
        body = self._post("/v1/generate", payload, cacheable=seed is not None)
        text = body.get("text") if isinstance(body, dict) else None
        if not isinstance(text, str):
            raise BackendError("/v1/generate: missing 'text'", "BAD_RESPONSE")
        return text


def _field(body, key, n):
    vals = body.get(key) if isinstance(body, dict) else None
    if not isinstance(vals, list) or len(vals) != n:
        raise BackendError(f"response field {key!r} missing or of wrong length", "BAD_RESPONSE")
    return vals


def _error_envelope(resp) -> tuple[str, str]:
    try:
        err = resp.json()["error"]
        return str(err["code"]), str(err["message"])
    except (ValueError, KeyError, TypeError):
        return f"HTTP_{resp.status_code}", resp.text[:200]
