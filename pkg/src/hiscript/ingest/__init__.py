"""Turn raw crawled project records into canonical scripts."""

from .filters import (
    DUPLICATE_ITEM,
    EMPTY_SECTION,
    EMPTY_TITLE,
    NON_ENGLISH,
    OVERLONG_SECTION,
    SECTION_NUMBER_STRIPPED,
    SUPPLIES_REMOVED,
    TITLE_NORMALIZED,
    WHITESPACE_NORMALIZED,
    FilterConfig,
    FilterDecision,
    IngestResult,
    IngestStats,
    RawProject,
    RawSection,
    filter_project,
    ingest_corpus,
    item_key,
    split_sentences,
)
from .langid import LanguageGuess, detect_language
from .titles import goal_to_phrase, normalize_title, strip_section_number

__all__ = [
    "DUPLICATE_ITEM", "EMPTY_SECTION", "EMPTY_TITLE", "NON_ENGLISH", "OVERLONG_SECTION",
    "SECTION_NUMBER_STRIPPED", "SUPPLIES_REMOVED", "TITLE_NORMALIZED", "WHITESPACE_NORMALIZED",
    "FilterConfig", "FilterDecision", "IngestResult", "IngestStats", "LanguageGuess",
    "RawProject", "RawSection", "detect_language", "filter_project", "goal_to_phrase",
    "ingest_corpus", "item_key", "normalize_title", "split_sentences", "strip_section_number",
]
