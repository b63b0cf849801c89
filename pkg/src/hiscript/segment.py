"""Unsupervised step segmentation: NSP, perplexity, HAC, topic detection, equal splits.

Every method returns ``SegmentationPoints`` where a point ``b`` is a boundary
before step ``b`` (0-based).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Hashable, Sequence

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from .errors import ValidationError
from .model import SegmentationPoints, Step
from .scoring.base import cosine_matrix

METHODS = ("nsp", "perplexity", "hac", "topic", "equal")


@dataclass(frozen=True)
class SegmenterConfig:
    method: str = "topic"
    nsp_k: int = 2
    hac_distance_threshold: float = 1.0
    topic_sim_threshold: float = 0.65
    equal_n: int | None = None
    topic_literal: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown segmentation method {self.method!r}", "BAD_CONFIG")
        if self.nsp_k < 1:
            raise ValidationError("nsp_k must be >= 1", "BAD_CONFIG")
        if self.hac_distance_threshold <= 0 or self.topic_sim_threshold <= 0:
            raise ValidationError("thresholds must be positive", "BAD_CONFIG")
        if self.equal_n is not None and self.equal_n < 1:
            raise ValidationError("equal_n must be >= 1", "BAD_CONFIG")

    def params(self) -> dict:
        d = asdict(self)
        del d["method"]
        keep = {
            "nsp": ("nsp_k",),
            "perplexity": (),
            "hac": ("hac_distance_threshold",),
            "topic": ("topic_sim_threshold", "topic_literal"),
            "equal": ("equal_n",),
        }[self.method]
        return {k: d[k] for k in keep}


def _texts(steps) -> list[str]:
    return [s.text if isinstance(s, Step) else s for s in steps]


def _concat(texts: Sequence[str]) -> str:
    return " ".join(t if t.endswith((".", "!", "?")) else t + "." for t in texts)


def segment_nsp(steps, k: int, backend) -> SegmentationPoints:
    """Cut at the ``k`` adjacent pairs with the lowest next-sentence scores."""
    texts = _texts(steps)
    n = len(texts)
    if n < 2:
        raise ValidationError("NSP segmentation needs at least 2 steps", "TOO_FEW_STEPS")
    if not 1 <= k <= n - 1:
        raise ValidationError(f"k={k} out of range for {n} steps", "BAD_K")
    scores = backend.next_sentence_prob(list(zip(texts, texts[1:])))
    order = sorted(range(n - 1), key=lambda i: (scores[i], i))
    return SegmentationPoints(n, tuple(sorted(i + 1 for i in order[:k])))


def segment_perplexity(steps, backend) -> SegmentationPoints:
    """Mark ``i`` when appending step i raises the prefix perplexity and
    prepending step i-1 raises the suffix perplexity."""
    texts = _texts(steps)
    n = len(texts)
    if n < 3:
        raise ValidationError("perplexity segmentation needs at least 3 steps", "TOO_FEW_STEPS")
    prefixes = [_concat(texts[: i + 1]) for i in range(n)]
    suffixes = [_concat(texts[i:]) for i in range(n)]
    ppl = backend.perplexity(prefixes + suffixes)
    pre, suf = ppl[:n], ppl[n:]
    points = [i for i in range(1, n) if pre[i] > pre[i - 1] and suf[i - 1] > suf[i]]
    return SegmentationPoints(n, tuple(points))


def repair_contiguity(assignments: Sequence[Hashable], window: int = 1) -> list:
    """Send each step to the majority label among its neighbours until stable.

    Ties keep the current label.  At most ``len(assignments)`` sequential
    passes are made; any label still split into several runs afterwards has
    its later runs renamed so that every label occupies one contiguous run.
    """
    labels = list(assignments)
    if not labels:
        raise ValidationError("assignments must be non-empty", "EMPTY_INPUT")
    n = len(labels)
    if n == 1:
        return labels
    for _ in range(n):
        changed = False
        for i in range(n):
            nbrs = labels[max(0, i - window): i] + labels[i + 1: i + 1 + window]
            counts: dict = {}
            for lab in nbrs:
                counts[lab] = counts.get(lab, 0) + 1
            best = max(counts.values())
            winners = [lab for lab, c in counts.items() if c == best]
            if labels[i] in winners or len(winners) > 1:
                continue
            labels[i] = winners[0]
            changed = True
        if not changed:
            break
    return _split_runs(labels)


def _split_runs(labels: list) -> list:
    seen = set()
    out = []
    fresh = 0
    ints = all(isinstance(x, (int, np.integer)) for x in labels)
    top = max(labels) if ints else None
    prev = object()
    current = None
    for lab in labels:
        if lab != prev:
            if lab in seen:
                fresh += 1
                current = top + fresh if ints else f"{lab}#{fresh}"
            else:
                current = lab
            seen.add(lab)
            prev = lab
        out.append(current)
    return out


def _boundaries(labels: Sequence) -> tuple[int, ...]:
    return tuple(i for i in range(1, len(labels)) if labels[i] != labels[i - 1])


def hac_labels(vectors: np.ndarray, threshold: float) -> list[int]:
    """Ward-linkage cluster ids, merging stopped above ``threshold``."""
    vectors = np.asarray(vectors, dtype=float)
    if len(vectors) == 1:
        return [1]
    Z = linkage(vectors, method="ward", metric="euclidean")
    return [int(x) for x in fcluster(Z, t=threshold, criterion="distance")]


def segment_hac(steps, threshold: float, backend) -> SegmentationPoints:
    texts = _texts(steps)
    n = len(texts)
    if n < 2:
        raise ValidationError("clustering segmentation needs at least 2 steps", "TOO_FEW_STEPS")
    labels = repair_contiguity(hac_labels(backend.embed(texts), threshold))
    return SegmentationPoints(n, _boundaries(labels))


def count_communities(sims: np.ndarray, members: Sequence[int], threshold: float) -> int:
    """Connected components of the ``sim >= threshold`` graph over ``members``."""
    members = list(members)
    parent = {m: m for m in members}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, a in enumerate(members):
        for b in members[i + 1:]:
            if sims[a, b] >= threshold:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[rb] = ra
    return len({find(m) for m in members})


def topic_points(sims: np.ndarray, threshold: float, literal: bool = False) -> tuple[list[int], list[int]]:
    """Grow a window one step at a time and cut when it holds two topics.

    Returns ``(points, raw)`` where ``raw`` keeps the ``y - 2`` values the
    loop records.  The default window is ``steps[x:y]`` and the loop runs
    through ``y == n`` so the last step is examined.  ``literal=True`` uses
    the inclusive window ``steps[x..y]`` with ``y < n``.
    """
    n = sims.shape[0]
    x, y = 0, 2
    points, raw = [], []
    while (y < n) if literal else (y <= n):
        members = range(x, y + 1) if literal else range(x, y)
        if count_communities(sims, members, threshold) < 2:
            y += 1
        else:
            raw.append(y - 2)
            points.append(y - 1)
            x = y - 1
            y += 1
    return points, raw


def segment_topics(steps, sim_threshold: float, backend, literal: bool = False) -> SegmentationPoints:
    texts = _texts(steps)
    n = len(texts)
    if n < 3:
        raise ValidationError("topic segmentation needs at least 3 steps", "TOO_FEW_STEPS")
    sims = cosine_matrix(backend.embed(texts))
    points, _ = topic_points(sims, sim_threshold, literal)
    return SegmentationPoints(n, tuple(sorted(set(points))))


def segment_equal(n_steps: int, n_segments: int) -> SegmentationPoints:
    """Boundaries at ``round(i * n_steps / n_segments)``, halves rounded up."""
    if not 1 <= n_segments <= n_steps:
        raise ValidationError(f"need 1 <= n_segments <= n_steps, got {n_segments}/{n_steps}", "BAD_N")
    pts = sorted({math.floor(i * n_steps / n_segments + 0.5) for i in range(1, n_segments)})
    return SegmentationPoints(n_steps, tuple(pts))


def segment_steps(steps, cfg: SegmenterConfig, backend) -> tuple[SegmentationPoints, dict]:
    """Dispatch on ``cfg.method``, degrading to fewer boundaries on short inputs.

    The returned dict carries debug details (raw loop indices for the topic
    method, the effective k or n when clamped).
    """
    texts = _texts(steps)
    n = len(texts)
    if n == 0:
        raise ValidationError("cannot segment an empty step list", "EMPTY_INPUT")
    debug: dict = {}
    m = cfg.method
    if n == 1:
        return SegmentationPoints(1), debug
    if m == "nsp":
        k = min(cfg.nsp_k, n - 1)
        if k != cfg.nsp_k:
            debug["effective_k"] = k
        return segment_nsp(texts, k, backend), debug
    if m == "perplexity":
        if n < 3:
            return SegmentationPoints(n), debug
        return segment_perplexity(texts, backend), debug
    if m == "hac":
        return segment_hac(texts, cfg.hac_distance_threshold, backend), debug
    if m == "topic":
        if n < 3:
            return SegmentationPoints(n), debug
        sims = cosine_matrix(backend.embed(texts))
        points, raw = topic_points(sims, cfg.topic_sim_threshold, cfg.topic_literal)
        debug["raw_points"] = raw
        return SegmentationPoints(n, tuple(sorted(set(points)))), debug
    if cfg.equal_n is None:
        raise ValidationError("equal split needs equal_n", "BAD_CONFIG")
    eff = min(cfg.equal_n, n)
    if eff != cfg.equal_n:
        debug["effective_n"] = eff
    return segment_equal(n, eff), debug
