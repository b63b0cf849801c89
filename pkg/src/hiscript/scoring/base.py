from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from ..errors import ConfigurationError, ValidationError


@runtime_checkable
class ScoringBackend(Protocol):
    """Provider of every model-derived signal the pipeline needs."""

    name: str

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...

    def next_sentence_prob(self, pairs: Sequence[tuple[str, str]]) -> list[float]: ...

    def perplexity(self, texts: Sequence[str]) -> list[float]: ...

    def generate(self, prompt: str, max_tokens: int = 256, seed: int | None = None) -> str: ...


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "deterministic-local"
    endpoint: str | None = None
    timeout: float = 10_000.0  # milliseconds
    max_in_flight: int = 4
    cache_dir: str | None = None
    max_retries: int = 3
    backoff: float = 0.05  # seconds, doubled per retry
    dim: int = 256
    bigrams: bool = False

    def __post_init__(self):
        if self.kind not in ("deterministic-local", "remote"):
            raise ConfigurationError(f"unknown backend kind {self.kind!r}")
        if self.kind == "remote" and not self.endpoint:
            raise ConfigurationError("remote backend requires an endpoint")
        if self.timeout <= 0:
            raise ConfigurationError("timeout must be positive")
        if self.max_in_flight < 1:
            raise ConfigurationError("max_in_flight must be >= 1")

    @classmethod
    def parse(cls, spec: str, **kw) -> "BackendConfig":
        """``local`` or ``remote:<url>``."""
        if spec in ("local", "deterministic-local"):
            return cls(**kw)
        if spec.startswith("remote:"):
            return cls(kind="remote", endpoint=spec[len("remote:"):], **kw)
        raise ConfigurationError(f"backend must be 'local' or 'remote:<url>', got {spec!r}")


def check_texts(texts: Sequence[str]) -> list[str]:
    texts = list(texts)
    for i, t in enumerate(texts):
        if not isinstance(t, str) or not t.strip():
            raise ValidationError(f"text {i} is empty", "EMPTY_TEXT")
    return texts


def cosine_matrix(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = a if b is None else np.asarray(b, dtype=float)
    na = np.linalg.norm(a, axis=1, keepdims=True)
    nb = np.linalg.norm(b, axis=1, keepdims=True)
    na[na == 0] = 1.0
    nb[nb == 0] = 1.0
    return (a / na) @ (b / nb).T


def cosine(u, v) -> float:
    return float(cosine_matrix(np.atleast_2d(u), np.atleast_2d(v))[0, 0])
