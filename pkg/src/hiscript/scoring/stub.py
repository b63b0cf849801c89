"""In-process conformance stub for the remote scoring protocol, plus its check suite."""

from __future__ import annotations

import json
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from ..errors import BackendError, HiScriptError
from .base import BackendConfig
from .local import LocalBackend

_REFERENCE_TEXT = [
    "Mix the flour and the sugar in a bowl",
    "Pour the batter into the pan",
    "Bake the cake for thirty minutes",
    "Cut the wood to length",
    "Sand the edges until smooth",
]


class StubServer:
    """Serves the four endpoints from a ``LocalBackend``.

    Fault injection: ``fail_next(n, status)`` answers the next ``n`` requests
    with an error envelope; ``latency`` delays every response.  ``max_seen``
    records the peak number of concurrent requests.
    """

    def __init__(self, backend: LocalBackend | None = None, host="127.0.0.1", port=0, latency=0.0):
        if backend is None:
            backend = LocalBackend().fit_lm(_REFERENCE_TEXT)
        self.backend = backend
        self.latency = latency
        self._lock = threading.Lock()
        self._failures: list[tuple[int, str]] = []
        self.in_flight = 0
        self.max_seen = 0
        self.requests: list[tuple[str, str | None]] = []
        self._httpd = ThreadingHTTPServer((host, port), self._handler())
        self._httpd.daemon_threads = True
        self._thread = None

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def fail_next(self, n: int, status: int = 503, code: str = "UNAVAILABLE") -> None:
        with self._lock:
            self._failures.extend([(status, code)] * n)

    def reset(self) -> None:
        with self._lock:
            self._failures.clear()
            self.requests.clear()
            self.max_seen = 0

    def start(self) -> "StubServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def wait(self) -> None:
        self._thread.join()

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    def dispatch(self, path: str, payload: dict) -> tuple[int, dict]:
        b = self.backend
        try:
            if path == "/v1/embed":
                return 200, {"vectors": b.embed(_strs(payload, "texts")).tolist()}
            if path == "/v1/nsp":
                pairs = payload.get("pairs")
                if not isinstance(pairs, list) or not all(isinstance(p, list) and len(p) == 2 for p in pairs):
                    return 400, _err("BAD_REQUEST", "'pairs' must be a list of [str, str]")
                return 200, {"probs": b.next_sentence_prob([tuple(p) for p in pairs])}
            if path == "/v1/perplexity":
                return 200, {"ppl": b.perplexity(_strs(payload, "texts"))}
            if path == "/v1/generate":
                if "expect" in payload:
                    return 200, {"text": payload["expect"]}
                prompt = payload.get("prompt")
                if not isinstance(prompt, str):
                    return 400, _err("BAD_REQUEST", "'prompt' must be a string")
                return 200, {"text": b.generate(prompt, payload.get("max_tokens", 256), payload.get("seed"))}
        except _BadRequest as exc:
            return 400, _err("BAD_REQUEST", str(exc))
        except HiScriptError as exc:
            return 422, _err(exc.code, str(exc))
        return 404, _err("NOT_FOUND", f"no endpoint {path}")

    def _handler(self):
        stub = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, *args):
                pass

            def _send(self, status, body):
                data = json.dumps(body).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def do_GET(self):
                self._send(405, _err("METHOD_NOT_ALLOWED", "use POST"))

            def do_POST(self):
                with stub._lock:
                    stub.in_flight += 1
                    stub.max_seen = max(stub.max_seen, stub.in_flight)
                    stub.requests.append((self.path, self.headers.get("X-Request-Id")))
                    failure = stub._failures.pop(0) if stub._failures else None
                try:
                    length = int(self.headers.get("Content-Length", 0))
                    raw = self.rfile.read(length)
                    if stub.latency:
                        time.sleep(stub.latency)
                    if failure is not None:
                        self._send(failure[0], _err(failure[1], "injected failure"))
                        return
                    try:
                        payload = json.loads(raw or b"{}")
                        if not isinstance(payload, dict):
                            raise ValueError
                    except ValueError:
                        self._send(400, _err("BAD_REQUEST", "body must be a JSON object"))
                        return
                    self._send(*stub.dispatch(self.path, payload))
                finally:
                    with stub._lock:
                        stub.in_flight -= 1

        return Handler


class _BadRequest(Exception):
    pass


def _strs(payload, key):
    vals = payload.get(key)
    if not isinstance(vals, list) or not all(isinstance(v, str) for v in vals):
        raise _BadRequest(f"{key!r} must be a list of strings")
    return vals


def _err(code, message):
    return {"error": {"code": code, "message": message}}


# -- conformance suite ----------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def run_conformance(make_client=None) -> list[CheckResult]:
    """Run every protocol check against a fresh stub.

    ``make_client(config)`` builds the client under test; defaults to
    ``RemoteBackend``.
    """
    if make_client is None:
        from .remote import RemoteBackend as make_client

    results = []
    with StubServer() as stub:
        ref = stub.backend

        def client(**kw):
            kw.setdefault("backoff", 0.01)
            return make_client(BackendConfig(kind="remote", endpoint=stub.url, **kw))

        def check(name):
            def deco(fn):
                stub.reset()
                stub.latency = 0.0
                try:
                    detail = fn() or ""
                    results.append(CheckResult(name, True, detail))
                except Exception as exc:  # a failed check is a result, not a crash
                    results.append(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))
                return fn
            return deco

        texts = ["mix flour sugar", "pour the batter", "sand the edges"]

        @check("embed endpoint")
        def _():
            got = client().embed(texts)
            assert np.allclose(got, ref.embed(texts), atol=1e-12), "vectors differ from reference"

        @check("nsp endpoint")
        def _():
            pairs = [(texts[0], texts[1]), (texts[1], texts[1])]
            got = client().next_sentence_prob(pairs)
            assert np.allclose(got, ref.next_sentence_prob(pairs)), got

        @check("perplexity endpoint")
        def _():
            got = client().perplexity(texts)
            assert np.allclose(got, ref.perplexity(texts)), got

        @check("generate endpoint")
        def _():
            c = client()
            expect = "To go green, <section> with save power, turn off lights. ünïcode ✓"
            assert c.generate("Ask question: How to go green", 64, 7, expect=expect) == expect
            assert c.generate("Ask question: How to go green", 64, 7) == ref.generate(
                "Ask question: How to go green", 64, 7)

        @check("error envelope")
        def _():
            stub.fail_next(1, status=400, code="BAD_INPUT")
            try:
                client().embed(["x"])
            except BackendError as exc:
                assert exc.code == "BAD_INPUT" and exc.status == 400 and not exc.retryable, vars(exc)
                assert len(stub.requests) == 1, "4xx must not be retried"
                assert exc.request_ids == [stub.requests[0][1]], "request id not surfaced"
                return f"code={exc.code}"
            raise AssertionError("error envelope did not raise")

        @check("retry on 5xx")
        def _():
            stub.fail_next(2, status=503)
            got = client(max_retries=3).embed(["x"])
            assert np.allclose(got, ref.embed(["x"]))
            ids = [rid for _, rid in stub.requests]
            assert len(ids) == 3 and len(set(ids)) == 3, ids

        @check("retries exhausted")
        def _():
            stub.fail_next(10, status=500, code="BOOM")
            try:
                client(max_retries=2).perplexity(["x"])
            except BackendError as exc:
                assert exc.retryable and len(exc.request_ids) == 3, vars(exc)
                return f"{len(exc.request_ids)} attempts"
            raise AssertionError("exhausted retries did not raise")

        @check("in-flight bound")
        def _():
            stub.latency = 0.05
            c = client(max_in_flight=3)
            with ThreadPoolExecutor(max_workers=12) as pool:
                list(pool.map(lambda i: c.embed([f"text {i}"]), range(24)))
            assert 1 <= stub.max_seen <= 3, f"peak concurrency {stub.max_seen}"
            return f"peak={stub.max_seen}"

        @check("cache transparency")
        def _():
            with tempfile.TemporaryDirectory() as tmp:
                cached = client(cache_dir=tmp)
                a = cached.embed(texts)
                n = len(stub.requests)
                b = cached.embed(texts)
                assert len(stub.requests) == n, "cache hit still reached the server"
                assert np.array_equal(a, b) and np.array_equal(a, client().embed(texts))

    return results
