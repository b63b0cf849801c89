"""Raw project filtering: seven cleaning rules, then title normalization."""

from __future__ import annotations

import hashlib
import json
import logging
import re
import string
from dataclasses import dataclass, field
from typing import Iterable

from ..errors import ValidationError
from ..model import SECTION_TOKEN, Script, build_script, has_howto_prefix
from .langid import detect_language
from .titles import goal_to_phrase, normalize_title, strip_section_number

log = logging.getLogger(__name__)

# rejection reasons, in rule order
NON_ENGLISH = "NON_ENGLISH"
EMPTY_SECTION = "EMPTY_SECTION"
OVERLONG_SECTION = "OVERLONG_SECTION"
DUPLICATE_ITEM = "DUPLICATE_ITEM"
EMPTY_TITLE = "EMPTY_TITLE"
REASONS = (NON_ENGLISH, EMPTY_SECTION, OVERLONG_SECTION, DUPLICATE_ITEM, EMPTY_TITLE)

# transformations
SUPPLIES_REMOVED = "SUPPLIES_REMOVED"
SECTION_NUMBER_STRIPPED = "SECTION_NUMBER_STRIPPED"
WHITESPACE_NORMALIZED = "WHITESPACE_NORMALIZED"
TITLE_NORMALIZED = "TITLE_NORMALIZED"

_SUPPLIES = re.compile(
    r"\b(supplies|materials|supply list|parts list|ingredients list|"
    r"what you(?:'ll| will)? need|things you(?:'ll| will)? need|tools needed)\b",
    re.IGNORECASE,
)
_CONTROL = re.compile(r"[\x00-\x1f\x7f\u00a0\u2028\u2029]")
_ABBREVIATIONS = frozenset(
    """e.g i.e etc vs approx dr mr mrs ms st no fig ca min max est inc jr sr""".split()
)
_SENT_END = re.compile(r"([.!?]+)(\s+)(?=[\"'(\[]?[A-Z0-9])")


@dataclass(frozen=True)
class RawSection:
    name: str
    body: str


@dataclass(frozen=True)
class RawProject:
    title: str
    category: str
    sections: tuple[RawSection, ...]
    id: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "RawProject":
        if not isinstance(d.get("title"), str) or not isinstance(d.get("sections"), list):
            raise ValidationError("raw project needs a string title and a sections list", "MALFORMED_RECORD")
        secs = []
        for s in d["sections"]:
            if not isinstance(s, dict):
                raise ValidationError("section is not an object", "MALFORMED_RECORD")
            secs.append(RawSection(str(s.get("name") or ""), str(s.get("body") or "")))
        pid = d.get("id")
        return cls(d["title"], str(d.get("category") or ""), tuple(secs), None if pid is None else str(pid))

    def fingerprint(self) -> str:
        payload = json.dumps(
            [self.title, self.category, [[s.name, s.body] for s in self.sections]],
            ensure_ascii=False,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class FilterConfig:
    max_section_words: int = 128
    min_sections: int = 1
    english_confidence_threshold: float = 0.9
    drop_supply_sections: bool = True

    def __post_init__(self):
        if self.max_section_words < 1:
            raise ValidationError("max_section_words must be >= 1", "BAD_CONFIG")
        if not 0.0 <= self.english_confidence_threshold <= 1.0:
            raise ValidationError("english_confidence_threshold must be in [0, 1]", "BAD_CONFIG")


@dataclass
class FilterDecision:
    accepted: bool
    reasons: list[str] = field(default_factory=list)
    transformations: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"accepted": self.accepted, "reasons": self.reasons, "transformations": self.transformations}


def normalize_space(text: str) -> str:
    return " ".join(_CONTROL.sub(" ", text).split())


def split_sentences(text: str) -> list[str]:
    """Split prose into sentences; one trailing period per sentence is dropped.

    A break needs terminal punctuation followed by whitespace and an
    uppercase letter or digit; known abbreviations never end a sentence.
    """
    text = normalize_space(text)
    if not text:
        return []
    pieces = []
    start = 0
    for m in _SENT_END.finditer(text):
        head = text[start:m.start()]
        last = head.rsplit(" ", 1)[-1].lower().rstrip(".")
        if m.group(1) == "." and last in _ABBREVIATIONS:
            continue
        pieces.append(text[start:m.end(1)])
        start = m.end()
    pieces.append(text[start:])
    out = []
    for p in pieces:
        p = p.strip()
        if p.endswith(".") and not p.endswith(".."):
            p = p[:-1].rstrip()
        p = p.replace(SECTION_TOKEN, " ").strip()
        if p:
            out.append(p)
    return out


def word_count(text: str) -> int:
    return len(text.split())


def item_key(goal: str) -> str:
    """Duplicate-detection key: lowercase, no punctuation, no articles, no how-to prefix."""
    g = goal_to_phrase(goal).lower()
    g = g.translate(str.maketrans({c: " " for c in string.punctuation}))
    words = [w for w in g.split() if w not in ("a", "an", "the")]
    if words and words[0] == "make":
        words = words[1:]
    return " ".join(words)


def _clean_subgoal(name: str) -> str | None:
    name = name.strip()
    if has_howto_prefix(name):
        name = goal_to_phrase(name)
    return name or None


def filter_project(raw: RawProject, cfg: FilterConfig, seen_items: set) -> tuple[FilterDecision, Script | None]:
    """Apply the cleaning rules in order and build a script on acceptance.

    ``seen_items`` holds duplicate keys of accepted projects; it is updated
    when ``raw`` is accepted.
    """
    decision = FilterDecision(False)
    reasons, edits = decision.reasons, decision.transformations

    # 1) language
    text = " ".join([raw.title, *(s.body for s in raw.sections)])
    if text.strip():
        guess = detect_language(text)
        if guess.en_confidence < cfg.english_confidence_threshold:
            reasons.append(NON_ENGLISH)

    # 2) supplies / materials sections
    sections = list(raw.sections)
    if cfg.drop_supply_sections:
        kept = [s for s in sections if not _SUPPLIES.search(s.name)]
        if len(kept) != len(sections):
            edits.append(SUPPLIES_REMOVED)
        sections = kept

    # 3) section numbers
    renamed = []
    stripped_any = False
    for s in sections:
        name = strip_section_number(s.name)
        if name != s.name.strip():
            stripped_any = True
        renamed.append(RawSection(name, s.body))
    if stripped_any:
        edits.append(SECTION_NUMBER_STRIPPED)
    sections = renamed

    # 4) whitespace and control characters
    cleaned = [RawSection(normalize_space(s.name), normalize_space(s.body)) for s in sections]
    if any(a.name != b.name.strip() or a.body != b.body for a, b in zip(cleaned, sections)):
        edits.append(WHITESPACE_NORMALIZED)
    sections = cleaned

    # 5) empty sections (figure/video-only content)
    bodies = [split_sentences(s.body) for s in sections]
    if len(sections) < cfg.min_sections or any(not b for b in bodies):
        reasons.append(EMPTY_SECTION)

    # 6) overlong sections
    if any(word_count(s.body) > cfg.max_section_words for s in sections):
        reasons.append(OVERLONG_SECTION)

    # 7) duplicate items
    title = normalize_space(raw.title)
    goal = normalize_title(title) if title else ""
    key = item_key(goal) if goal else ""
    if key and key in seen_items:
        reasons.append(DUPLICATE_ITEM)
    if not goal:
        reasons.append(EMPTY_TITLE)

    if reasons:
        return decision, None

    if goal != title:
        edits.append(TITLE_NORMALIZED)
    decision.accepted = True
    seen_items.add(key)
    blocks = [(_clean_subgoal(s.name), b) for s, b in zip(sections, bodies)]
    script = build_script(goal, blocks, source_id=raw.id or raw.fingerprint(), category=raw.category or None)
    return decision, script


@dataclass
class IngestStats:
    total: int = 0
    accepted: int = 0
    rejected: int = 0
    unreadable: int = 0
    rejections: dict = field(default_factory=lambda: {r: 0 for r in REASONS})
    transformations: dict = field(default_factory=dict)
    by_category: dict = field(default_factory=dict)
    scripts: int = 0
    subgoals: int = 0
    steps: int = 0
    words: int = 0
    duplicate_key: str = "lowercase, punctuation/article/how-to stripped normalized title"

    def add_script(self, script: Script) -> None:
        n_sub = len(script.segments)
        n_steps = script.n_steps
        n_words = sum(word_count(st.text) for seg in script.segments for st in seg.steps)
        self.scripts += 1
        self.subgoals += n_sub
        self.steps += n_steps
        self.words += n_words
        row = self.by_category.setdefault(script.category or "", {"scripts": 0, "subgoals": 0, "steps": 0})
        row["scripts"] += 1
        row["subgoals"] += n_sub
        row["steps"] += n_steps

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "unreadable": self.unreadable,
            "rejections": self.rejections,
            "transformations": dict(sorted(self.transformations.items())),
            "by_category": dict(sorted(self.by_category.items())),
            "totals": {"scripts": self.scripts, "subgoals": self.subgoals, "steps": self.steps, "words": self.words},
            "duplicate_key": self.duplicate_key,
        }


@dataclass
class IngestResult:
    corpus: list[Script]
    stats: IngestStats
    decisions: list[dict]


def ingest_corpus(raws: Iterable, cfg: FilterConfig = FilterConfig()) -> IngestResult:
    """Stream ``filter_project`` over records, keeping input order.

    ``raws`` may yield ``RawProject`` objects or plain dicts; records that
    cannot be read are logged, counted and skipped.
    """
    stats = IngestStats()
    seen: set = set()
    corpus, decisions = [], []
    for pos, rec in enumerate(raws):
        stats.total += 1
        try:
            if isinstance(rec, dict) and "__error__" in rec:
                raise ValidationError(rec["__error__"], "MALFORMED_JSONL")
            raw = rec if isinstance(rec, RawProject) else RawProject.from_dict(rec)
        except ValidationError as exc:
            log.warning("record %d unreadable: %s", pos, exc)
            stats.unreadable += 1
            decisions.append({"position": pos, "id": None, "title": None, "accepted": False,
                              "reasons": ["UNREADABLE"], "transformations": []})
            continue
        decision, script = filter_project(raw, cfg, seen)
        decisions.append({"position": pos, "id": raw.id, "title": raw.title, **decision.to_dict()})
        for t in decision.transformations:
            stats.transformations[t] = stats.transformations.get(t, 0) + 1
        if decision.accepted:
            stats.accepted += 1
            stats.add_script(script)
            corpus.append(script)
        else:
            stats.rejected += 1
            for r in decision.reasons:
                stats.rejections[r] += 1
    return IngestResult(corpus, stats, decisions)
