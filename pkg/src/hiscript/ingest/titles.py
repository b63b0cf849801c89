"""Title and section-name normalization."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

from ..errors import ValidationError
from ..model import has_howto_prefix

_SECTION_NUMBER = re.compile(
    r"^\s*(?:(?:section|step|part)\s*#?\s*\d+\s*[:.)\-]*|\d+\s*[.:)]|\d+\s+-)\s*",
    re.IGNORECASE,
)
_HOWTO_PREFIX = re.compile(r"^\s*how\s+to\b[\s:,\-]*", re.IGNORECASE)

# first words that are as often nouns as verbs in titles ("Light Box", "Plant Stand")
AMBIGUOUS = frozenset(
    """box light stamp frame plant paint print file pipe plate stack tile mask
    lamp table shelf bag can jam pot pin tape wax wire coat pack ring net
    power fire time model mark cover screen case map dress juice line
    cast mount house plan game patch block board clip string charge""".split()
)

DETERMINERS = frozenset(
    """a an the your my our his her their its this that these those some any
    own yourself it them one two three four five six seven eight nine ten
    simple easy cheap quick""".split()
)

IRREGULAR_PAST = {
    "built": "build", "made": "make", "cut": "cut", "hung": "hang", "sewn": "sew",
    "wove": "weave", "woven": "weave", "grew": "grow", "grown": "grow", "put": "put",
    "set": "set", "got": "get", "rode": "ride", "drew": "draw", "drawn": "draw",
    "broke": "break", "wrote": "write", "spun": "spin", "bound": "bind", "found": "find",
    "ground": "grind", "dug": "dig", "froze": "freeze", "frozen": "freeze",
}


@lru_cache(maxsize=1)
def verb_lexicon() -> frozenset[str]:
    text = resources.files(__package__).joinpath("verbs.txt").read_text(encoding="utf-8")
    words = []
    for line in text.splitlines():
        if line.startswith("#"):
            continue
        words.extend(line.split())
    return frozenset(words)


def strip_section_number(name: str) -> str:
    """Drop leading ``section 3:``, ``Step 12:`` or ``4.`` numbering."""
    return _SECTION_NUMBER.sub("", name, count=1).strip()


def _match_case(word: str, lemma: str) -> str:
    if word.isupper() and len(word) > 1:
        return lemma.upper()
    if word[:1].isupper():
        return lemma[:1].upper() + lemma[1:]
    return lemma


def destem(word: str, next_word: str | None = None) -> str | None:
    """Recover a verb lemma from an ``-ing``/``-ed`` form, or None."""
    lex = verb_lexicon()
    w = word.lower()
    cands = []
    if w.endswith("ing") and len(w) > 4:
        stem = w[:-3]
        cands = [stem, stem + "e"]
        if len(stem) > 2 and stem[-1] == stem[-2]:
            cands.append(stem[:-1])
    elif next_word is not None and next_word.lower() in DETERMINERS:
        # past forms only count as verbs when an object follows ("Built a Shed")
        if w in IRREGULAR_PAST:
            cands = [IRREGULAR_PAST[w]]
        elif w.endswith("ed") and len(w) > 3:
            stem = w[:-2]
            cands = [stem, stem + "e", w[:-1]]
            if w.endswith("ied"):
                cands.append(w[:-3] + "y")
            if len(stem) > 2 and stem[-1] == stem[-2]:
                cands.append(stem[:-1])
    for c in cands:
        if c in lex:
            return _match_case(word, c)
    return None


def normalize_title(title: str) -> str:
    """Turn a project title into a ``How to ...`` goal."""
    title = " ".join(title.split())
    if not title:
        raise ValidationError("title is empty", "EMPTY_TITLE")
    if has_howto_prefix(title):
        return title
    words = title.split(" ")
    first = words[0]
    nxt = words[1] if len(words) > 1 else None
    lemma = first.lower().strip(",:;!")
    lex = verb_lexicon()
    if lemma in lex:
        if lemma not in AMBIGUOUS or (nxt is not None and nxt.lower() in DETERMINERS):
            return "How to " + title
    recovered = destem(first, nxt)
    if recovered is not None and (
        recovered.lower() not in AMBIGUOUS or (nxt is not None and nxt.lower() in DETERMINERS)
    ):
        return "How to " + " ".join([recovered, *words[1:]])
    return "How to make " + title


def _keeps_case(word: str) -> bool:
    # acronyms (LED, DIY) and inner capitals (iPhone, McQueen) keep their case
    letters = [c for c in word if c.isalpha()]
    if len(letters) > 1 and all(c.isupper() for c in letters):
        return True
    return any(c.isupper() for c in word[1:])


def goal_to_phrase(goal: str) -> str:
    """Strip a leading ``How to`` and lowercase the verb. Idempotent."""
    rest = " ".join(goal.split())
    stripped = False
    while has_howto_prefix(rest):
        rest = rest[_HOWTO_PREFIX.match(rest).end():].strip()
        stripped = True
    if not stripped or not rest:
        return rest
    first = rest.split(" ", 1)[0]
    if _keeps_case(first):
        return rest
    return rest[:1].lower() + rest[1:]
