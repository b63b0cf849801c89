"""Two-level script data model: goal -> segments (subgoal + steps)."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ValidationError

SECTION_TOKEN = "<section>"

_HOWTO = re.compile(r"^\s*how\s+to\b", re.IGNORECASE)

# violation codes
EMPTY_GOAL = "EMPTY_GOAL"
NO_SEGMENTS = "NO_SEGMENTS"
EMPTY_SEGMENT = "EMPTY_SEGMENT"
EMPTY_STEP = "EMPTY_STEP"
STEP_HAS_SECTION_TOKEN = "STEP_HAS_SECTION_TOKEN"
STEP_HAS_NEWLINE = "STEP_HAS_NEWLINE"
EMPTY_SUBGOAL = "EMPTY_SUBGOAL"
SUBGOAL_HAS_HOWTO_PREFIX = "SUBGOAL_HAS_HOWTO_PREFIX"
SUBGOAL_HAS_SECTION_TOKEN = "SUBGOAL_HAS_SECTION_TOKEN"
NON_CONTIGUOUS_INDICES = "NON_CONTIGUOUS_INDICES"


def has_howto_prefix(text: str) -> bool:
    return bool(_HOWTO.match(text))


@dataclass(frozen=True)
class Step:
    text: str
    index: int


@dataclass(frozen=True)
class Segment:
    steps: tuple[Step, ...]
    subgoal: str | None = None


@dataclass(frozen=True)
class Script:
    goal: str
    segments: tuple[Segment, ...]
    source_id: str = ""
    category: str | None = None
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def n_steps(self) -> int:
        return sum(len(seg.steps) for seg in self.segments)

    @property
    def subgoals(self) -> list[str | None]:
        return [seg.subgoal for seg in self.segments]

    def with_segments(self, segments: Sequence[Segment], **meta) -> "Script":
        merged = {**self.meta, **meta}
        return Script(self.goal, tuple(segments), self.source_id, self.category, merged)

    def to_dict(self) -> dict:
        out = {
            "source_id": self.source_id,
            "goal": self.goal,
            "category": self.category,
            "segments": [
                {"subgoal": seg.subgoal, "steps": [s.text for s in seg.steps]}
                for seg in self.segments
            ],
        }
        if self.meta:
            out["meta"] = self.meta
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Script":
        try:
            blocks = [(seg.get("subgoal"), list(seg["steps"])) for seg in d["segments"]]
            return build_script(
                d["goal"],
                blocks,
                source_id=str(d.get("source_id", "")),
                category=d.get("category"),
                meta=dict(d.get("meta") or {}),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValidationError(f"malformed script record: {exc!r}", "MALFORMED_RECORD") from exc


def build_script(goal, blocks, source_id="", category=None, meta=None) -> Script:
    """Build a script from ``[(subgoal, [step_text, ...]), ...]``, numbering steps 0..N-1."""
    segments = []
    i = 0
    for subgoal, texts in blocks:
        steps = []
        for text in texts:
            steps.append(Step(text, i))
            i += 1
        segments.append(Segment(tuple(steps), subgoal))
    return Script(goal, tuple(segments), source_id, category, dict(meta or {}))


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


def validate_script(script: Script) -> list[Violation]:
    """Return every violated structural invariant; an empty list means valid."""
    report = []

    def add(code, message):
        report.append(Violation(code, message))

    if not script.goal or not script.goal.strip():
        add(EMPTY_GOAL, "goal is empty")
    if not script.segments:
        add(NO_SEGMENTS, "script has no segments")

    expected = 0
    contiguous = True
    for si, seg in enumerate(script.segments):
        if not seg.steps:
            add(EMPTY_SEGMENT, f"segment {si} has no steps")
        if seg.subgoal is not None:
            if not seg.subgoal.strip():
                add(EMPTY_SUBGOAL, f"segment {si} has a blank subgoal")
            elif has_howto_prefix(seg.subgoal):
                add(SUBGOAL_HAS_HOWTO_PREFIX, f"segment {si} subgoal starts with 'How to'")
            if SECTION_TOKEN in seg.subgoal:
                add(SUBGOAL_HAS_SECTION_TOKEN, f"segment {si} subgoal contains {SECTION_TOKEN}")
        for step in seg.steps:
            if not step.text or not step.text.strip():
                add(EMPTY_STEP, f"step {step.index} is blank")
            if SECTION_TOKEN in step.text:
                add(STEP_HAS_SECTION_TOKEN, f"step {step.index} contains {SECTION_TOKEN}")
            if "\n" in step.text or "\r" in step.text:
                add(STEP_HAS_NEWLINE, f"step {step.index} contains a newline")
            if contiguous and step.index != expected:
                add(
                    NON_CONTIGUOUS_INDICES,
                    f"segment {si}: expected step index {expected}, found {step.index}",
                )
                contiguous = False
            expected += 1
    return report


def ensure_valid(script: Script) -> Script:
    report = validate_script(script)
    if report:
        codes = [v.code for v in report]
        raise ValidationError(f"invalid script {script.source_id!r}: {codes}", "INVALID_SCRIPT", codes)
    return script


def flatten(script: Script) -> list[Step]:
    """All steps in order with subgoals discarded."""
    ensure_valid(script)
    return [step for seg in script.segments for step in seg.steps]


@dataclass(frozen=True)
class SegmentationPoints:
    """Sorted boundary indices; value ``b`` is a boundary before step ``b`` (0-based)."""

    n_steps: int
    points: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(int(p) for p in self.points))
        if self.n_steps < 1:
            raise ValidationError(f"n_steps must be >= 1, got {self.n_steps}", "BAD_POINTS")
        prev = 0
        for p in self.points:
            if p <= prev or p > self.n_steps - 1:
                raise ValidationError(
                    f"points {list(self.points)} are not strictly increasing within "
                    f"[1, {self.n_steps - 1}]",
                    "BAD_POINTS",
                )
            prev = p

    @property
    def n_segments(self) -> int:
        return len(self.points) + 1

    def sizes(self) -> list[int]:
        edges = [0, *self.points, self.n_steps]
        return [b - a for a, b in zip(edges, edges[1:])]


def points_of(script: Script) -> SegmentationPoints:
    points = []
    total = 0
    for seg in script.segments[:-1]:
        total += len(seg.steps)
        points.append(total)
    return SegmentationPoints(script.n_steps, tuple(points))


def apply_segmentation(steps: Sequence[Step], seg: SegmentationPoints) -> list[Segment]:
    """Cut ``steps`` at the boundary points into unlabeled segments."""
    if seg.n_steps != len(steps):
        raise ValidationError(
            f"segmentation covers {seg.n_steps} steps but {len(steps)} were given",
            "LENGTH_MISMATCH",
        )
    edges = [0, *seg.points, seg.n_steps]
    return [Segment(tuple(steps[a:b])) for a, b in zip(edges, edges[1:])]


def segments_from_texts(texts: Iterable[str], seg: SegmentationPoints, subgoals=None) -> list[Segment]:
    steps = [Step(t, i) for i, t in enumerate(texts)]
    out = apply_segmentation(steps, seg)
    if subgoals is not None:
        out = [Segment(s.steps, g) for s, g in zip(out, subgoals)]
    return out
