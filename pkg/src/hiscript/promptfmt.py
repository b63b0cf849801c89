"""Render scripts into linear ``<section>``-delimited prompts and parse them back.

Interleaving::

    To {goal}, <section> with {subgoal}, {step}. {step}. <section> with {subgoal}, {step}.

Top-down::

    To {goal}, the subgoals are: {subgoal}, {subgoal}. <section>, {step}. {step}. <section>, {step}.

Steps are joined by ". ", so a literal ". " inside a step (and ", " inside a
subgoal) is written with a no-break space instead of the space.  Literal
no-break spaces are doubled, which keeps ``parse(render(s)) == s`` exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ValidationError
from .ingest.titles import goal_to_phrase
from .model import (
    SECTION_TOKEN,
    Script,
    build_script,
    ensure_valid,
    has_howto_prefix,
)

INTERLEAVING = "interleaving"
TOPDOWN = "topdown"
MODES = (INTERLEAVING, TOPDOWN)

# parse warnings
NO_SECTION_TOKEN = "NO_SECTION_TOKEN"
SUBGOAL_COUNT_MISMATCH = "SUBGOAL_COUNT_MISMATCH"
EMPTY_SEGMENT_DROPPED = "EMPTY_SEGMENT_DROPPED"
TRAILING_FRAGMENT = "TRAILING_FRAGMENT"
MISSING_SUBGOAL = "MISSING_SUBGOAL"

ASK_PREFIX = "Ask question: "
SUBGOALS_ARE = "the subgoals are:"

NBSP = "\u00a0"
_WITH = re.compile(r"^with\s+", re.IGNORECASE)
_TO = re.compile(r"^to\s+", re.IGNORECASE)
_SUBGOALS_ARE = re.compile(r"\s*the subgoals are:\s*", re.IGNORECASE)


def _escape(text: str, seps: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == NBSP:
            out.append(NBSP * 2)
        elif ch in seps and text[i + 1: i + 2] == " ":
            out.append(ch + NBSP)
            i += 1
        else:
            out.append(ch)
        i += 1
    return "".join(out)


def _unescape(text: str) -> str:
    # an odd run of no-break spaces starts with an escaped space
    out = []
    i = 0
    while i < len(text):
        if text[i] != NBSP:
            out.append(text[i])
            i += 1
            continue
        j = i
        while j < len(text) and text[j] == NBSP:
            j += 1
        run = j - i
        if run % 2:
            out.append(" ")
            run -= 1
        out.append(NBSP * (run // 2))
        i = j
    return "".join(out)


def _step_block(steps) -> str:
    return ". ".join(_escape(s.text, ".") for s in steps) + "."


def _labeled(script: Script) -> Script:
    ensure_valid(script)
    for i, seg in enumerate(script.segments):
        if seg.subgoal is None:
            raise ValidationError(f"segment {i} has no subgoal", "MISSING_SUBGOAL")
    return script


def render_interleaving(script: Script) -> str:
    _labeled(script)
    parts = [f"To {goal_to_phrase(script.goal)},"]
    for seg in script.segments:
        parts.append(f"{SECTION_TOKEN} with {_escape(seg.subgoal, '.,')}, {_step_block(seg.steps)}")
    return " ".join(parts)


def render_topdown(script: Script) -> str:
    _labeled(script)
    subs = ", ".join(_escape(seg.subgoal, ".,") for seg in script.segments)
    parts = [f"To {goal_to_phrase(script.goal)}, {SUBGOALS_ARE} {subs}."]
    for seg in script.segments:
        parts.append(f"{SECTION_TOKEN}, {_step_block(seg.steps)}")
    return " ".join(parts)


def render_tokens_only(script: Script) -> str:
    """Interleaving layout with the subgoal clauses left out."""
    ensure_valid(script)
    parts = [f"To {goal_to_phrase(script.goal)},"]
    for seg in script.segments:
        parts.append(f"{SECTION_TOKEN} {_step_block(seg.steps)}")
    return " ".join(parts)


def render(script: Script, mode: str) -> str:
    if mode == INTERLEAVING:
        return render_interleaving(script)
    if mode == TOPDOWN:
        return render_topdown(script)
    raise ValidationError(f"unknown prompt mode {mode!r}", "BAD_MODE")


def make_inference_prompt(goal: str) -> str:
    if not goal or not goal.strip():
        raise ValidationError("goal is empty", "EMPTY_GOAL")
    return ASK_PREFIX + goal


@dataclass
class ParseOutcome:
    script: Script
    warnings: list[str] = field(default_factory=list)
    goal_phrase: str = ""

    def to_dict(self) -> dict:
        d = self.script.to_dict()
        d["warnings"] = list(self.warnings)
        d["goal_phrase"] = self.goal_phrase
        return d


def _split_steps(body: str) -> list[str]:
    out = []
    for piece in body.split(". "):
        piece = _unescape(piece).strip()
        if piece:
            out.append(piece.replace(SECTION_TOKEN, " ").strip())
    return [p for p in out if p]


def _body_steps(body: str, last: bool, warnings: list) -> list[str]:
    body = body.strip()
    if body.endswith("."):
        body = body[:-1]
    elif last and body:
        warnings.append(TRAILING_FRAGMENT)
    return _split_steps(body)


def _clean_subgoal(text: str | None) -> str | None:
    if text is None:
        return None
    text = _unescape(text).strip()
    if has_howto_prefix(text):
        text = goal_to_phrase(text)
    return text or None


def _goal_phrase(header: str) -> str:
    h = header.strip()
    h = _TO.sub("", h, count=1)
    if h.endswith(","):
        h = h[:-1]
    return h.strip()


def parse_generated(text: str, mode: str, goal: str, expect_subgoals: bool = True) -> ParseOutcome:
    """Best-effort expansion of linear model output into a script.

    Never raises on model output.  With ``expect_subgoals=False`` the text
    is read as the tokens-only layout (no ``with {subgoal},`` clauses).  Repairs are listed in ``warnings``: text
    without a ``<section>`` token becomes one unlabeled segment; top-down
    step blocks beyond the subgoal list get no subgoal; segments left with no
    steps are dropped.
    """
    if mode not in MODES:
        raise ValidationError(f"unknown prompt mode {mode!r}", "BAD_MODE")
    text = (text or "").replace("\r", " ").replace("\n", " ")
    warnings: list[str] = []
    blocks: list[tuple[str | None, list[str]]] = []

    if SECTION_TOKEN not in text:
        warnings.append(NO_SECTION_TOKEN)
        steps = _body_steps(text, True, [])
        if steps:
            blocks.append((None, steps))
        else:
            warnings.append(EMPTY_SEGMENT_DROPPED)
        return _finish(blocks, warnings, goal, "")

    header, *sections = text.split(SECTION_TOKEN)
    n = len(sections)

    if mode == INTERLEAVING:
        phrase = _goal_phrase(header)
        for i, sec in enumerate(sections):
            sec = sec.strip()
            m = _WITH.match(sec) if expect_subgoals else None
            subgoal = None
            if m is not None:
                rest = sec[m.end():]
                cut = rest.find(", ")
                if cut < 0:
                    subgoal, body = rest, ""
                else:
                    subgoal, body = rest[:cut], rest[cut + 2:]
            else:
                body = sec.lstrip(",").strip()
                if expect_subgoals:
                    warnings.append(MISSING_SUBGOAL)
            steps = _body_steps(body, i == n - 1, warnings)
            blocks.append((_clean_subgoal(subgoal), steps))
    else:
        m = _SUBGOALS_ARE.search(header)
        if m is None:
            phrase = _goal_phrase(header)
            subgoals: list[str | None] = []
            if expect_subgoals:
                warnings.append(MISSING_SUBGOAL)
        else:
            phrase = _goal_phrase(header[: m.start()])
            listing = header[m.end():].strip()
            if listing.endswith("."):
                listing = listing[:-1]
            subgoals = [_clean_subgoal(x) for x in listing.split(", ")]
            subgoals = [s for s in subgoals if s]
        if m is not None and len(subgoals) != n:
            warnings.append(SUBGOAL_COUNT_MISMATCH)
        for i, sec in enumerate(sections):
            body = sec.strip()
            if body.startswith(","):
                body = body[1:]
            steps = _body_steps(body, i == n - 1, warnings)
            blocks.append((subgoals[i] if i < len(subgoals) else None, steps))

    kept = [(g, s) for g, s in blocks if s]
    if len(kept) != len(blocks):
        warnings.append(EMPTY_SEGMENT_DROPPED)
    return _finish(kept, warnings, goal, phrase)


def _finish(blocks, warnings, goal, phrase) -> ParseOutcome:
    seen = []
    for w in warnings:
        if w not in seen:
            seen.append(w)
    goal = goal if goal and goal.strip() else ("How to " + phrase if phrase else "How to")
    return ParseOutcome(build_script(goal, blocks), seen, phrase)


def strip_for_eval(outcome) -> str:
    """Step sentences only, joined by ". "."""
    script = outcome.script if isinstance(outcome, ParseOutcome) else outcome
    return ". ".join(st.text for seg in script.segments for st in seg.steps)
