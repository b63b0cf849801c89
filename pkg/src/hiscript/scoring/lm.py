"""Word-trigram language model with add-one smoothing."""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import Iterable

from ..errors import ValidationError

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

_TOKEN = re.compile(r"[a-z0-9]+(?:'[a-z0-9]+)*")
_SENT = re.compile(r"(?<=[.!?])\s+")


def lm_tokens(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


def lm_sentences(text: str) -> list[list[str]]:
    """Token lists per sentence; sentences without word tokens are dropped."""
    out = []
    for piece in _SENT.split(text.strip()):
        toks = lm_tokens(piece)
        if toks:
            out.append(toks)
    return out


class TrigramLM:
    """Add-one smoothed trigram model scored sentence by sentence.

    Every sentence is padded with two ``<s>`` and one ``</s>``; unseen words
    map to ``<unk>``.  Perplexity is ``exp(-mean log p)`` over all predicted
    tokens, so repeating a text verbatim leaves it unchanged.
    """

    def __init__(self):
        self.trigrams: Counter = Counter()
        self.contexts: Counter = Counter()
        self.vocab: set[str] = set()
        self.n_sentences = 0

    @property
    def fitted(self) -> bool:
        return self.n_sentences > 0

    @property
    def V(self) -> int:
        return len(self.vocab) + 2  # + </s> + <unk>

    def fit(self, texts: Iterable[str]) -> "TrigramLM":
        sentences = [s for t in texts for s in lm_sentences(t)]
        for toks in sentences:
            self.vocab.update(toks)
        for toks in sentences:
            seq = [BOS, BOS, *toks, EOS]
            for i in range(2, len(seq)):
                self.trigrams[(seq[i - 2], seq[i - 1], seq[i])] += 1
                self.contexts[(seq[i - 2], seq[i - 1])] += 1
        self.n_sentences += len(sentences)
        return self

    def _map(self, tok: str) -> str:
        return tok if tok in self.vocab else UNK

    def logprob(self, u: str, v: str, w: str) -> float:
        return math.log((self.trigrams[(u, v, w)] + 1) / (self.contexts[(u, v)] + self.V))

    def sentence_logprob(self, toks: list[str]) -> tuple[float, int]:
        seq = [BOS, BOS, *(self._map(t) for t in toks), EOS]
        total = 0.0
        for i in range(2, len(seq)):
            total += self.logprob(seq[i - 2], seq[i - 1], seq[i])
        return total, len(seq) - 2

    def perplexity(self, text: str) -> float:
        sentences = lm_sentences(text)
        if not sentences:
            raise ValidationError("text has no word tokens to score", "EMPTY_TEXT")
        lp, n = 0.0, 0
        for toks in sentences:
            a, b = self.sentence_logprob(toks)
            lp += a
            n += b
        return math.exp(-lp / n)

    def fingerprint(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for key, c in sorted(self.trigrams.items()):
            h.update(("\t".join(key) + f"\t{c}\n").encode("utf-8"))
        return h.hexdigest()[:12]
