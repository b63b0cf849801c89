"""Automatic metrics for generated scripts: BLEU-1, ROUGE-L, Distinct-n,
an embedding-matching score and perplexity, plus corpus aggregation."""

from __future__ import annotations

import logging
import math
import re
import string
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .model import Script
from .promptfmt import ParseOutcome, strip_for_eval

log = logging.getLogger(__name__)

EMPTY_CANDIDATE = "EMPTY_CANDIDATE"
EMPTY_REFERENCE = "EMPTY_REFERENCE"
METRICS = ("bertscore", "perplexity", "bleu1", "rougeL", "distinct3")

_PUNCT = re.escape(string.punctuation)
_SPLIT = re.compile(rf"[\s{_PUNCT}]+")
_KEEP_PUNCT = re.compile(rf"[{_PUNCT}]|[^\s{_PUNCT}]+")


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True
    split: str = "whitespace+punct"
    punctuation_stripped: bool = True

    def tokenize(self, text: str) -> list[str]:
        if self.lowercase:
            text = text.lower()
        if self.punctuation_stripped:
            return [t for t in _SPLIT.split(text) if t]
        return _KEEP_PUNCT.findall(text)


DEFAULT_TOKENIZER = TokenizerConfig()


def _warn(warnings, code):
    if warnings is not None:
        warnings.append(code)
    log.debug("metric input empty after tokenization: %s", code)


def bleu1(candidate: str, references: Sequence[str], tok: TokenizerConfig = DEFAULT_TOKENIZER,
          warnings: list | None = None) -> float:
    """Clipped unigram precision times the brevity penalty.

    The reference length used by the penalty is the one closest to the
    candidate length, the shorter one on ties.
    """
    if isinstance(references, str):
        references = [references]
    cand = tok.tokenize(candidate)
    refs = [tok.tokenize(r) for r in references]
    if not cand:
        _warn(warnings, EMPTY_CANDIDATE)
        return 0.0
    if not refs or not any(refs):
        _warn(warnings, EMPTY_REFERENCE)
        return 0.0
    max_ref: Counter = Counter()
    for r in refs:
        for w, c in Counter(r).items():
            max_ref[w] = max(max_ref[w], c)
    clipped = sum(min(c, max_ref[w]) for w, c in Counter(cand).items())
    c = len(cand)
    r = min((len(x) for x in refs), key=lambda L: (abs(L - c), L))
    bp = math.exp(min(0.0, 1.0 - r / c))
    return bp * clipped / c


def corpus_bleu1(candidates: Sequence[str], references: Sequence[Sequence[str]],
                 tok: TokenizerConfig = DEFAULT_TOKENIZER) -> float:
    """Corpus-level variant: counts and lengths pooled before dividing."""
    clipped = total = ref_len = 0
    for cand_text, ref_texts in zip(candidates, references):
        cand = tok.tokenize(cand_text)
        refs = [tok.tokenize(r) for r in ref_texts]
        if not cand or not any(refs):
            continue
        max_ref: Counter = Counter()
        for r in refs:
            for w, n in Counter(r).items():
                max_ref[w] = max(max_ref[w], n)
        clipped += sum(min(n, max_ref[w]) for w, n in Counter(cand).items())
        total += len(cand)
        ref_len += min((len(x) for x in refs), key=lambda L: (abs(L - len(cand)), L))
    if total == 0:
        return 0.0
    return math.exp(min(0.0, 1.0 - ref_len / total)) * clipped / total


def lcs_length(a: Sequence, b: Sequence) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str, tok: TokenizerConfig = DEFAULT_TOKENIZER,
            warnings: list | None = None) -> float:
    cand, ref = tok.tokenize(candidate), tok.tokenize(reference)
    if not cand:
        _warn(warnings, EMPTY_CANDIDATE)
        return 0.0
    if not ref:
        _warn(warnings, EMPTY_REFERENCE)
        return 0.0
    lcs = lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    p, r = lcs / len(cand), lcs / len(ref)
    return 2 * p * r / (p + r)


def distinct_n(text: str, n: int, tok: TokenizerConfig = DEFAULT_TOKENIZER) -> float:
    if n < 1:
        raise ValidationError("n must be >= 1", "BAD_N")
    toks = tok.tokenize(text)
    if len(toks) < n:
        return 0.0
    grams = [tuple(toks[i:i + n]) for i in range(len(toks) - n + 1)]
    return len(set(grams)) / len(grams)


def embed_score(candidate: str, reference: str, backend,
                tok: TokenizerConfig = DEFAULT_TOKENIZER, warnings: list | None = None) -> float:
    """Greedy token matching by cosine in both directions, combined as F1."""
    cand, ref = tok.tokenize(candidate), tok.tokenize(reference)
    if not cand or not ref:
        _warn(warnings, EMPTY_CANDIDATE if not cand else EMPTY_REFERENCE)
        return 0.0
    vocab = sorted(set(cand) | set(ref))
    vecs = np.asarray(backend.embed(vocab), dtype=float)
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    vecs = vecs / norms
    pos = {w: i for i, w in enumerate(vocab)}
    C = vecs[[pos[w] for w in cand]]
    R = vecs[[pos[w] for w in ref]]
    sims = np.clip(C @ R.T, -1.0, 1.0)
    precision = float(sims.max(axis=1).mean())
    recall = float(sims.max(axis=0).mean())
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _bucket(n_segments: int) -> str:
    return str(n_segments) if n_segments < 5 else "5+"


@dataclass
class EvalReport:
    bertscore: float
    perplexity: float
    bleu1: float
    rougeL: float
    distinct3: float
    n_scripts: int
    raw: dict = field(default_factory=dict)
    tokenizer: dict = field(default_factory=dict)
    backends: dict = field(default_factory=dict)
    perplexity_unit: str = "per-token"
    bleu_aggregation: str = "sentence-mean"
    by_segment_count: dict = field(default_factory=dict)
    warnings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def row(self) -> dict:
        return {m: getattr(self, m) for m in METRICS}


def _gold_text(g) -> str:
    return strip_for_eval(g)


def eval_corpus(outputs: Sequence, golds: Sequence[Script], backend, ppl_backend=None,
                tok: TokenizerConfig = DEFAULT_TOKENIZER, corpus_bleu: bool = False) -> EvalReport:
    """Average per-script metrics over aligned outputs and gold scripts.

    ``outputs`` holds ``ParseOutcome`` objects, scripts or plain strings.
    Reported values are percentages rounded to one decimal (perplexity is not
    scaled); unrounded means are kept in ``raw``.
    """
    if len(outputs) != len(golds):
        raise ValidationError(
            f"{len(outputs)} outputs vs {len(golds)} gold scripts", "MISALIGNED"
        )
    if not outputs:
        raise ValidationError("nothing to evaluate", "EMPTY_INPUT")
    ppl_backend = ppl_backend or backend
    cands = [o if isinstance(o, str) else strip_for_eval(o) for o in outputs]
    refs = [_gold_text(g) for g in golds]
    warn: list[str] = []
    per = {m: [] for m in METRICS}
    for c, r in zip(cands, refs):
        per["bleu1"].append(bleu1(c, [r], tok, warn))
        per["rougeL"].append(rouge_l(c, r, tok, warn))
        per["distinct3"].append(distinct_n(c, 3, tok))
        per["bertscore"].append(embed_score(c, r, backend, tok, warn))
    scorable = [i for i, c in enumerate(cands) if tok.tokenize(c)]
    ppl = ppl_backend.perplexity([cands[i] for i in scorable]) if scorable else []
    per["perplexity"] = [float(x) for x in ppl]

    def mean(xs):
        return math.fsum(xs) / len(xs) if xs else 0.0

    raw = {m: mean(v) for m, v in per.items()}
    if corpus_bleu:
        raw["bleu1"] = corpus_bleu1(cands, [[r] for r in refs], tok)
    scaled = {m: round(raw[m] * (1 if m == "perplexity" else 100), 1) for m in METRICS}

    buckets: dict = {}
    for i, g in enumerate(golds):
        buckets.setdefault(_bucket(len(g.segments)), []).append(i)
    by_seg = {}
    for key in sorted(buckets, key=lambda k: (len(k), k)):
        idx = buckets[key]
        by_seg[key] = {
            "n": len(idx),
            **{m: round(mean([per[m][i] for i in idx]) * 100, 1)
               for m in ("bleu1", "rougeL", "distinct3", "bertscore")},
        }

    return EvalReport(
        n_scripts=len(cands),
        raw=raw,
        tokenizer=asdict(tok),
        backends={"embedding": backend.name, "perplexity": ppl_backend.name},
        bleu_aggregation="corpus" if corpus_bleu else "sentence-mean",
        by_segment_count=by_seg,
        warnings=dict(sorted(Counter(warn).items())),
        **scaled,
    )


__all__ = [
    "TokenizerConfig", "EvalReport", "bleu1", "corpus_bleu1", "rouge_l", "distinct_n",
    "embed_score", "eval_corpus", "lcs_length", "ParseOutcome",
]
