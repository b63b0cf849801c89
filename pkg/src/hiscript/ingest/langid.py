"""Coarse language identification from script ratios and stopword coverage."""

from __future__ import annotations

import re
import unicodedata
from typing import NamedTuple

from ..errors import ValidationError

EN_STOPWORDS = frozenset(
    """a about above after again all also am an and any are as at be because
    been before being below between both but by can could did do does doing
    down during each few for from further had has have having he her here
    hers him his how i if in into is it its itself just me more most my no
    nor not now of off on once only or other our out over own same she
    should so some such than that the their them then there these they this
    those through to too under until up very was we were what when where
    which while who why will with would you your yours yourself make sure
    use using then next first after once""".split()
)

# Stopwords of other Latin-script languages; words shared with English are left out.
OTHER_STOPWORDS = {
    "fr": frozenset(
        """le la les des du de et est une un pour dans que qui sur avec ce pas
        au aux elle il nous vous sont mais ou par plus cette leur très
        ses votre vos""".split()
    ),
    "es": frozenset(
        """el los las del y es una por con para que en un se su al lo como
        más pero sus le ya este esta muy cuando también hasta""".split()
    ),
    "de": frozenset(
        """der das und ist nicht ein eine mit den dem von zu sich auf für
        es im auch als wie noch nach bei aus wird oder sie wir ihr""".split()
    ),
    "it": frozenset(
        """il di che è e la un una con non sono della del le gli si ma
        anche questo nel alla più""".split()
    ),
    "nl": frozenset(
        """de het een en van ik te dat niet zijn op aan met voor er maar
        om hij ook als bij nog wel""".split()
    ),
    "pt": frozenset(
        """o os da do e é um uma para com não que em na se por mais dos
        das ao como mas foi""".split()
    ),
}

_WORD = re.compile(r"[^\W\d_]+", re.UNICODE)

_SCRIPTS = (
    ("zh", ("CJK UNIFIED",)),
    ("ja", ("HIRAGANA", "KATAKANA")),
    ("ko", ("HANGUL",)),
    ("ru", ("CYRILLIC",)),
    ("ar", ("ARABIC",)),
    ("el", ("GREEK",)),
    ("he", ("HEBREW",)),
    ("hi", ("DEVANAGARI",)),
    ("th", ("THAI",)),
)


class LanguageGuess(NamedTuple):
    lang: str
    confidence: float
    en_confidence: float


def _script_of(ch: str) -> str:
    if "a" <= ch.lower() <= "z":
        return "latin"
    name = unicodedata.name(ch, "")
    if "LATIN" in name:
        return "latin"
    for lang, keys in _SCRIPTS:
        if any(k in name for k in keys):
            return lang
    return "other"


def detect_language(text: str) -> LanguageGuess:
    """Guess the language of ``text``.

    ``en_confidence`` is the share of alphabetic characters in Latin script
    times the share of English among all matched stopwords.  With no
    stopwords at all the English share defaults to 0.5.
    """
    if not text or not text.strip():
        raise ValidationError("cannot detect the language of empty text", "EMPTY_TEXT")
    counts: dict[str, int] = {}
    for ch in text:
        if ch.isalpha():
            s = _script_of(ch)
            counts[s] = counts.get(s, 0) + 1
    n_alpha = sum(counts.values())
    if n_alpha == 0:
        return LanguageGuess("und", 0.0, 0.0)
    latin = counts.get("latin", 0) / n_alpha
    if latin < 0.5:
        script = max((k for k in counts if k != "latin"), key=lambda k: (counts[k], k))
        lang = script if script != "other" else "und"
        return LanguageGuess(lang, 1.0 - latin, latin * 0.5)

    words = [w.lower() for w in _WORD.findall(text)]
    hits = {"en": sum(w in EN_STOPWORDS for w in words)}
    for lang, stops in OTHER_STOPWORDS.items():
        hits[lang] = sum(w in stops for w in words)
    total = sum(hits.values())
    share = {k: (v / total if total else 0.0) for k, v in hits.items()}
    en_conf = latin * (share["en"] if total else 0.5)
    best = max(hits, key=lambda k: (hits[k], k == "en"))
    if total == 0:
        best = "en"
    conf = latin * (share[best] if total else 0.5)
    return LanguageGuess(best, conf, en_conf)
