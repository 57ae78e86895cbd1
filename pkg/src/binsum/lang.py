"""Lightweight language identification for doc comment summaries.

The built-in detector is a lexicon heuristic tuned for short technical
English against the Latin-script languages that show up most often in
open source doc comments, plus script-range checks for non-Latin text.
Anything without usable evidence is reported as "und" with confidence
0.0; callers treat that as not-English. Swap in a stronger model through
the LanguageDetector protocol where available.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Protocol

__all__ = [
    "LanguageGuess",
    "LanguageDetector",
    "HeuristicLanguageDetector",
    "DEFAULT_DETECTOR",
    "detect_language",
    "is_english",
]


@dataclass(frozen=True)
class LanguageGuess:
    code: str          # ISO 639-1 where known, "und" for undetermined
    confidence: float  # share of evidence backing the winner, 0..1


class LanguageDetector(Protocol):
    def detect(self, text: str) -> LanguageGuess: ...


# --------------------------------------------------------------------------
# evidence tables
# --------------------------------------------------------------------------

_STOPWORDS: dict[str, frozenset[str]] = {
    "en": frozenset(
        "the a an of to in and or is are was were be been for with on at by "
        "from this that it its as if not when which".split()
    ),
    "fr": frozenset(
        "le la les un une des du de et ou est sont pour avec dans sur par ce "
        "cette il elle ne pas que qui au aux".split()
    ),
    "de": frozenset(
        "der die das ein eine und oder ist sind war für mit auf im aus bei "
        "dem den des nicht wenn wird werden zur zum".split()
    ),
    "es": frozenset(
        "el la los las un una y o es son fue para con en por este esta se "
        "no que del al cuando".split()
    ),
    "it": frozenset(
        "il lo la i gli le un una e o è sono per con su da nel della di "
        "non che quando".split()
    ),
    "nl": frozenset(
        "de het een en of is zijn was voor met op in van bij niet dat "
        "deze wordt worden".split()
    ),
    "pt": frozenset(
        "o a os as um uma e ou é são para com em por este esta não que "
        "do da dos das ao".split()
    ),
}

# frequent content words of C documentation; weaker than stopwords
_EN_TECH_WORDS = frozenset(
    """
    add adds allocate allocates allocated argument array bit bits buffer
    buffers byte bytes call calls callback check checks clear clears clock
    close closes code compute computes convert converts copies copy count
    create creates current data default delete deletes descriptor destroy
    device disable disables enable enables entries entry error errors field
    fields file files find finds flag flags free frees function functions
    get gets given handle handles handler hardware header index init
    initialize initializes input insert inserts interrupt length list lookup
    memory message mode new next node null number object offset open opens
    output parse parses pointer pointers print prints process queue read
    reads receive receives register registers remove removes reset resets
    result return returns select selects send sends set sets size source
    specified stack state status stream string strings struct table timer
    update updates value values wait write writes zero
    """.split()
)

# derivational endings that are common in English and rare in the other
# Latin-script languages above; weak evidence only
_EN_SUFFIXES = ("ing", "ed", "ly", "ness")

_DIACRITIC_HINTS: dict[str, tuple[str, float]] = {
    # char -> (language, weight)
    "é": ("fr", 1.0),
    "è": ("fr", 1.2),
    "ê": ("fr", 1.2),
    "à": ("fr", 1.0),
    "ç": ("fr", 1.0),
    "ù": ("fr", 1.2),
    "ä": ("de", 1.2),
    "ö": ("de", 1.0),
    "ü": ("de", 1.0),
    "ß": ("de", 1.5),
    "ñ": ("es", 1.5),
    "¿": ("es", 1.5),
    "¡": ("es", 1.5),
    "í": ("es", 0.8),
    "ó": ("es", 0.8),
    "ú": ("es", 0.8),
    "ì": ("it", 1.2),
    "ã": ("pt", 1.5),
    "õ": ("pt", 1.5),
    "ij": ("nl", 0.6),
}

_SCRIPT_RANGES: tuple[tuple[str, int, int], ...] = (
    ("zh", 0x4E00, 0x9FFF),
    ("ja", 0x3040, 0x30FF),
    ("ko", 0xAC00, 0xD7AF),
    ("ru", 0x0400, 0x04FF),
    ("el", 0x0370, 0x03FF),
    ("ar", 0x0600, 0x06FF),
    ("he", 0x0590, 0x05FF),
)

_WORD_RE = re.compile(r"[^\W\d_]+(?:'[^\W\d_]+)?", re.UNICODE)


def _split_words(text: str) -> list[str]:
    return [m.group().lower() for m in _WORD_RE.finditer(text)]


# --------------------------------------------------------------------------
# detector
# --------------------------------------------------------------------------


class HeuristicLanguageDetector:
    """Stopword, lexicon and script evidence; no external model."""

    def detect(self, text: str) -> LanguageGuess:
        if not text.strip():
            raise ValueError("cannot detect language of empty text")

        # non-Latin scripts first: a dominant script decides outright
        letters = [ch for ch in text if ch.isalpha()]
        if letters:
            script_counts: dict[str, int] = {}
            for ch in letters:
                point = ord(ch)
                for code, lo, hi in _SCRIPT_RANGES:
                    if lo <= point <= hi:
                        script_counts[code] = script_counts.get(code, 0) + 1
                        break
            if script_counts:
                code, hits = max(sorted(script_counts.items()), key=lambda kv: kv[1])
                share = hits / len(letters)
                if share >= 0.3:
                    return LanguageGuess(code, round(share, 4))

        scores: dict[str, float] = {}

        def bump(code: str, weight: float) -> None:
            scores[code] = scores.get(code, 0.0) + weight

        words = _split_words(text)
        for word in words:
            for code, stopwords in _STOPWORDS.items():
                if word in stopwords:
                    bump(code, 1.0)
            if word in _EN_TECH_WORDS:
                bump("en", 0.75)
            elif len(word) >= 4 and word.isascii() and word.endswith(_EN_SUFFIXES):
                bump("en", 0.5)

        lowered = text.lower()
        for ch, (code, weight) in _DIACRITIC_HINTS.items():
            count = lowered.count(ch)
            if count:
                bump(code, weight * count)

        total = sum(scores.values())
        if total <= 0.0:
            return LanguageGuess("und", 0.0)
        code, score = max(sorted(scores.items()), key=lambda kv: kv[1])
        return LanguageGuess(code, round(score / total, 4))


DEFAULT_DETECTOR: LanguageDetector = HeuristicLanguageDetector()


def detect_language(text: str, detector: LanguageDetector | None = None) -> LanguageGuess:
    return (detector or DEFAULT_DETECTOR).detect(text)


def is_english(
    text: str,
    detector: LanguageDetector | None = None,
    min_confidence: float = 0.5,
) -> bool:
    guess = detect_language(text, detector)
    return guess.code == "en" and guess.confidence >= min_confidence
