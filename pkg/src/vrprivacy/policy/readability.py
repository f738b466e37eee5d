"""ARI, Flesch reading ease, LIX and reading/speaking time."""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass

from ..errors import EmptyDocument
from .text import PolicyDoc

READING_WPM = 238
SPEAKING_WPM = 130
LONG_WORD_LETTERS = 6

VOWEL_RUN = re.compile(r"[aeiouy]+")


def count_letters(word: str) -> int:
    return sum(ch.isalpha() for ch in word)


def count_syllables(word: str) -> int:
    w = "".join(ch for ch in word.lower() if ch.isalpha())
    if not w:
        return 1
    n = len(VOWEL_RUN.findall(w))
    if w.endswith("e") and not w.endswith("le") and n > 1:
        n -= 1
    return max(n, 1)


@dataclass(frozen=True)
class ReadabilityReport:
    ari: float
    fres: float
    lix: float
    lpw: float
    spw: float
    wps: float
    sc: int
    wc: int
    rt_seconds: float
    st_seconds: float

    def to_dict(self) -> dict:
        return asdict(self)


def readability(doc: PolicyDoc) -> ReadabilityReport:
    sentences = [s for s in doc.sentences if s.words]
    words = [w for s in sentences for w in s.words]
    wc, sc = len(words), len(sentences)
    if wc == 0 or sc == 0:
        raise EmptyDocument("readability needs at least one word and one sentence")
    letters = sum(count_letters(w) for w in words)
    syllables = sum(count_syllables(w) for w in words)
    long_words = sum(count_letters(w) > LONG_WORD_LETTERS for w in words)
    lpw, spw, wps = letters / wc, syllables / wc, wc / sc
    return ReadabilityReport(
        ari=4.71 * lpw + 0.5 * wps - 21.43,
        fres=206.835 - 1.015 * wps - 84.6 * spw,
        lix=wps + 100 * long_words / wc,
        lpw=lpw, spw=spw, wps=wps, sc=sc, wc=wc,
        rt_seconds=wc / READING_WPM * 60,
        st_seconds=wc / SPEAKING_WPM * 60,
    )
