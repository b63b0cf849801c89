"""Subgoal labeling for segments.

The generative strategy asks the backend for the goal of a step list (the
inverse of script generation) and strips the ``How to`` prefix.  The
extractive strategy takes the leading verb phrase of the segment's medoid
step and needs no generator.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BackendError, HiScriptError, ValidationError
from .ingest.titles import goal_to_phrase
from .model import SECTION_TOKEN, Script, Segment, Step, has_howto_prefix
from .scoring.base import cosine_matrix

log = logging.getLogger(__name__)

GENERATIVE = "generative"
EXTRACTIVE = "extractive"

REPETITIVE_SUBGOAL = "REPETITIVE_SUBGOAL"
SUBGOAL_REPEATS_GOAL = "SUBGOAL_REPEATS_GOAL"
BACKEND_FALLBACK = "BACKEND_FALLBACK"

MAX_PHRASE_WORDS = 8
_CLAUSE_BREAK = re.compile(
    r"[,;:()!?]|\s[-–—]\s|\b(?:until|so that|because|while|when|before|after|then|which|if|unless)\b",
    re.IGNORECASE,
)


@dataclass(frozen=True)
class LabelRequest:
    goal: str
    segment_steps: tuple[Step, ...]
    strategy: str = EXTRACTIVE

    def __post_init__(self):
        if not self.segment_steps:
            raise ValidationError("a label request needs at least one step", "EMPTY_SEGMENT")
        if self.strategy not in (GENERATIVE, EXTRACTIVE):
            raise ValidationError(f"unknown labeling strategy {self.strategy!r}", "BAD_STRATEGY")


@dataclass(frozen=True)
class Label:
    text: str
    fallback: bool = False


def build_labeling_prompt(req: LabelRequest) -> str:
    steps = ". ".join(s.text.rstrip(".") for s in req.segment_steps)
    return f"Steps: {steps}. Goal:"


def leading_verb_phrase(text: str) -> str:
    """Text up to the first clause break, capped at eight words, verb lowercased."""
    t = text.replace(SECTION_TOKEN, " ").strip()
    m = _CLAUSE_BREAK.search(t)
    if m is not None and m.start() > 0:
        t = t[: m.start()]
    words = t.split()[:MAX_PHRASE_WORDS]
    if not words:
        words = text.split()[:MAX_PHRASE_WORDS]
    phrase = " ".join(words).rstrip(" .")
    phrase = goal_to_phrase("How to " + phrase) if phrase else phrase
    return phrase or text.strip()


def medoid_index(vectors: np.ndarray) -> int:
    """Row whose summed cosine to the other rows is largest (earliest on ties)."""
    sims = cosine_matrix(vectors)
    np.fill_diagonal(sims, 0.0)
    totals = sims.sum(axis=1)
    best = totals.max()
    # tolerance keeps ties stable against float summation order
    return int(np.flatnonzero(totals >= best - 1e-12)[0])


def _extractive(req: LabelRequest, backend) -> str:
    texts = [s.text for s in req.segment_steps]
    i = 0 if len(texts) == 1 else medoid_index(backend.embed(texts))
    # punctuation-only steps tidy down to nothing; keep the raw text then
    return _tidy(leading_verb_phrase(texts[i])) or " ".join(texts[i].split())


def _tidy(text: str) -> str:
    text = " ".join(text.replace(SECTION_TOKEN, " ").split())
    while has_howto_prefix(text):
        text = goal_to_phrase(text)
    return text.rstrip(" .?")


def label_segment(req: LabelRequest, backend) -> Label:
    if req.strategy == EXTRACTIVE:
        return Label(_extractive(req, backend))
    try:
        raw = backend.generate(build_labeling_prompt(req), max_tokens=32, seed=0)
        text = _tidy(goal_to_phrase(raw))
        if not text:
            raise BackendError("generator returned an empty label", "EMPTY_LABEL")
        return Label(text)
    except HiScriptError as exc:
        log.warning("generative labeling failed (%s); using extractive label", exc)
        return Label(_extractive(req, backend), fallback=True)


def label_script(goal: str, segments: Sequence[Segment], backend, strategy: str = EXTRACTIVE,
                 source_id: str = "", category: str | None = None, meta: dict | None = None) -> Script:
    """Label every segment; steps and partition are kept exactly.

    Consecutive identical subgoals and subgoals equal to the goal are flagged
    in ``meta["flags"]``, never rewritten.  Segments that fell back to the
    extractive strategy are listed in ``meta["fallback_segments"]``.
    """
    if not segments:
        raise ValidationError("label_script needs at least one segment", "NO_SEGMENTS")
    labels = [label_segment(LabelRequest(goal, seg.steps, strategy), backend) for seg in segments]
    flags = []
    norm = [lab.text.lower().strip() for lab in labels]
    goal_norm = goal_to_phrase(goal).lower().strip()
    for i in range(1, len(norm)):
        if norm[i] == norm[i - 1]:
            flags.append({"code": REPETITIVE_SUBGOAL, "segments": [i - 1, i]})
    for i, t in enumerate(norm):
        if t == goal_norm:
            flags.append({"code": SUBGOAL_REPEATS_GOAL, "segments": [i]})
    meta = dict(meta or {})
    meta["flags"] = flags
    fallback = [i for i, lab in enumerate(labels) if lab.fallback]
    if fallback:
        meta["fallback_segments"] = fallback
    new = tuple(Segment(seg.steps, lab.text) for seg, lab in zip(segments, labels))
    return Script(goal, new, source_id, category, meta)
