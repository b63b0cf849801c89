"""Deterministic in-process backend: hashed bag-of-words, trigram LM, echo generator."""

from __future__ import annotations

import hashlib
import random
import re
from typing import Iterable, Sequence

import numpy as np

from ..errors import ConfigurationError, LeakageError, ValidationError
from ..model import SECTION_TOKEN
from .base import check_texts, cosine_matrix
from .lm import TrigramLM, lm_tokens

MAX_PROMPT_CHARS = 20_000
_ASK = re.compile(r"^\s*ask question:\s*", re.IGNORECASE)


def _bucket(token: str, dim: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % dim


class LocalBackend:
    """Reference backend with no hidden state besides the fitted LM.

    Embeddings are L2-normalized hashed counts of lowercased word unigrams
    (plus bigrams when ``bigrams=True``).  NSP is ``(cos + 1) / 2``.
    Generation retrieves the closest exemplar target by goal embedding, or
    emits a fixed two-section interleaving script when none was given.
    """

    kind = "deterministic-local"

    def __init__(self, dim: int = 256, bigrams: bool = False, lm: TrigramLM | None = None):
        self.dim = dim
        self.bigrams = bigrams
        self.lm = lm
        self._exemplars: list[tuple[str, str]] = []
        self._exemplar_vecs = None

    @property
    def name(self) -> str:
        lm = self.lm.fingerprint() if self.lm is not None and self.lm.fitted else "none"
        return f"deterministic-local:dim={self.dim}:bigrams={int(self.bigrams)}:lm={lm}"

    # -- fitting ---------------------------------------------------------

    def fit_lm(self, scripts_or_texts: Iterable, split: str = "train") -> "LocalBackend":
        """Fit the trigram LM on training material only.

        Items may be strings or ``Script`` objects; scripts tagged with a
        ``split`` other than ``train`` are refused.
        """
        if split != "train":
            raise LeakageError(f"refusing to fit the LM on the {split!r} split", "LEAKAGE")
        texts = []
        for item in scripts_or_texts:
            if isinstance(item, str):
                texts.append(item)
                continue
            tag = item.meta.get("split")
            if tag not in (None, "train"):
                raise LeakageError(f"script {item.source_id!r} belongs to the {tag!r} split", "LEAKAGE")
            texts.extend(st.text for seg in item.segments for st in seg.steps)
        self.lm = (self.lm or TrigramLM()).fit(texts)
        return self

    def set_exemplars(self, pairs: Iterable[tuple[str, str]]) -> "LocalBackend":
        self._exemplars = [(g, t) for g, t in pairs]
        self._exemplar_vecs = self.embed([g for g, _ in self._exemplars]) if self._exemplars else None
        return self

    # -- signals ---------------------------------------------------------

    def _vector(self, text: str) -> np.ndarray:
        toks = lm_tokens(text)
        feats = list(toks)
        if self.bigrams:
            feats += [f"{a} {b}" for a, b in zip(toks, toks[1:])]
        if not feats:
            feats = [text.strip()]
        v = np.zeros(self.dim)
        for f in feats:
            v[_bucket(f, self.dim)] += 1.0
        return v / np.linalg.norm(v)

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        texts = check_texts(texts)
        if not texts:
            return np.zeros((0, self.dim))
        return np.vstack([self._vector(t) for t in texts])

    def next_sentence_prob(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        pairs = list(pairs)
        if not pairs:
            return []
        a = self.embed([p[0] for p in pairs])
        b = self.embed([p[1] for p in pairs])
        cos = np.sum(a * b, axis=1)
        return [float(min(1.0, max(0.0, (c + 1.0) / 2.0))) for c in cos]

    def perplexity(self, texts: Sequence[str]) -> list[float]:
        texts = check_texts(texts)
        if self.lm is None or not self.lm.fitted:
            raise ConfigurationError("local perplexity needs a fitted LM (call fit_lm first)", "LM_NOT_FITTED")
        return [self.lm.perplexity(t) for t in texts]

    def generate(self, prompt: str, max_tokens: int = 256, seed: int | None = None) -> str:
        if not prompt or not prompt.strip():
            raise ValidationError("prompt is empty", "EMPTY_PROMPT")
        if len(prompt) > MAX_PROMPT_CHARS:
            raise ValidationError(f"prompt longer than {MAX_PROMPT_CHARS} characters", "OVERSIZE_PROMPT")
        body = prompt.strip()
        if body.startswith("Steps:"):
            return self._label(body)
        goal = _ASK.sub("", body)
        if self._exemplars:
            sims = cosine_matrix(self.embed([goal]), self._exemplar_vecs)[0]
            return self._exemplars[int(np.argmax(sims))][1]
        return self._echo(goal, seed)

    @staticmethod
    def _label(prompt: str) -> str:
        steps = prompt[len("Steps:"):].rsplit("Goal:", 1)[0].strip()
        first = steps.split(". ", 1)[0].strip().rstrip(".")
        words = first.split()[:6] or ["finish"]
        return "How to " + " ".join(words)

    @staticmethod
    def _echo(goal: str, seed: int | None) -> str:
        from ..ingest.titles import goal_to_phrase

        phrase = goal_to_phrase(goal).rstrip("?.!") or "do it"
        rng = random.Random(f"{phrase}|{seed}")
        n = rng.choice((2, 3))
        names = ["getting ready", "doing the main work", "finishing up"][:n]
        blocks = [
            f"{SECTION_TOKEN} with {name}, work on the task to {phrase}. check the result"
            for name in names
        ]
        return f"To {phrase}, " + ". ".join(blocks) + "."
