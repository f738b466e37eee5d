"""Validity, VR specificity, children's age and declared data types."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping
from urllib.parse import urlsplit

from ..catalog import normalize_phrase
from .components import ComponentCoverage
from .text import PolicyDoc

MIN_WORDS = 100

VR_TERMS = ("virtual reality", "VR", "immersive", "head-mounted display")

AGE_TERMS = frozenset({"years", "age", "old"})
AGE_WINDOW = 3
AGE_RANGE = (1, 21)
NUMBER_WORDS = {
    w: i for i, w in enumerate(
        "zero one two three four five six seven eight nine ten eleven twelve thirteen fourteen "
        "fifteen sixteen seventeen eighteen nineteen twenty".split())
}
NUMBER_WORDS["twenty-one"] = 21

COLLECTION_VERB = re.compile(r"\b(collect|gather|obtain|record|process|receiv)\w*", re.IGNORECASE)
VAGUE_TERMS = ("biometric data", "sensor data", "game interaction data")

# Store-wide policies that apps sometimes link instead of their own.
DEFAULT_STORE_POLICY_URLS = frozenset({
    "https://www.meta.com/legal/privacy-policy",
    "https://www.meta.com/legal/quest/privacy-policy",
    "https://www.oculus.com/legal/privacy-policy",
    "https://www.picoxr.com/legal/privacy-policy",
    "https://www.pico-interactive.com/legal/privacy-policy",
    "https://www.viveport.com/privacy-policy",
    "https://store.steampowered.com/privacy_agreement",
    "https://www.playstation.com/legal/privacy-policy",
    "https://privacy.microsoft.com/privacystatement",
})


class Validity(str, Enum):
    Valid = "Valid"
    TooShort = "TooShort"
    StoreGeneric = "StoreGeneric"


def _url_key(url: str) -> str:
    parts = urlsplit(url.strip())
    host = (parts.hostname or "").lower().removeprefix("www.")
    return host + parts.path.rstrip("/").lower()


def url_has_prefix(url: str, prefix: str) -> bool:
    key, pre = _url_key(url), _url_key(prefix)
    return key == pre or key.startswith(pre + "/")


def validity_check(doc: PolicyDoc, store_policy_urls: Iterable[str] = DEFAULT_STORE_POLICY_URLS) -> Validity:
    if doc.source_url and any(url_has_prefix(doc.source_url, p) for p in store_policy_urls):
        return Validity.StoreGeneric
    if doc.word_count < MIN_WORDS:
        return Validity.TooShort
    return Validity.Valid


def _term_pattern(term: str) -> re.Pattern:
    if term == "VR":
        return re.compile(r"(?<![^\W_])VR(?![^\W_])", re.IGNORECASE)
    body = r"[\s\-]+".join(re.escape(part) for part in re.split(r"[\s\-]+", term))
    return re.compile(rf"(?<![^\W_]){body}(?![^\W_])", re.IGNORECASE)


def specificity_check(doc: PolicyDoc, app_name: str | None = None) -> tuple[bool, list[str]]:
    text = doc.raw_text
    hits = [t for t in VR_TERMS if _term_pattern(t).search(text)]
    if app_name and app_name.strip() and _term_pattern(app_name.strip()).search(text):
        hits.append(app_name.strip())
    return bool(hits), hits


def _age_tokens(text: str) -> list[str]:
    # hyphens split here too so "13-year-old" yields 13 / year / old
    raw = [t for t in re.split(r"[\W_]+", text.lower()) if t]
    out = []
    for tok in raw:
        if tok == "one" and out and out[-1] == "twenty":
            out[-1] = "twenty-one"
        else:
            out.append(tok)
    return out


def _as_number(token: str) -> int | None:
    if token.isdigit():
        return int(token)
    return NUMBER_WORDS.get(token)


def child_age_candidates(doc: PolicyDoc, coverage: ComponentCoverage) -> list[int]:
    found = []
    paragraphs = {p.index: p for p in doc.paragraphs}
    for idx in coverage.paragraphs_with("CHILDREN"):
        tokens = _age_tokens(paragraphs[idx].text)
        for i, tok in enumerate(tokens):
            n = _as_number(tok)
            if n is None or not AGE_RANGE[0] <= n <= AGE_RANGE[1]:
                continue
            window = tokens[max(0, i - AGE_WINDOW):i] + tokens[i + 1:i + 1 + AGE_WINDOW]
            if AGE_TERMS.intersection(window):
                found.append(n)
    return found


def extract_child_age(doc: PolicyDoc, coverage: ComponentCoverage) -> int | None:
    candidates = child_age_candidates(doc, coverage)
    return max(candidates) if candidates else None


@dataclass(frozen=True)
class DeclaredSet:
    specific: frozenset[str]
    vague: bool
    evidence: tuple[tuple[str, str], ...] = field(default=())


def _phrase_regex(phrase: str) -> re.Pattern:
    return re.compile(rf"(?<![^\W_]){re.escape(normalize_phrase(phrase))}(?![^\W_])")


def extract_declared_datatypes(doc: PolicyDoc, coverage: ComponentCoverage,
                               corpus: Mapping[str, Iterable[str]]) -> DeclaredSet:
    compiled = [(dt, phrase, _phrase_regex(phrase)) for dt, phrases in corpus.items() for phrase in phrases]
    vague_res = [(t, _phrase_regex(t)) for t in VAGUE_TERMS]
    specific, evidence, vague = set(), [], False
    collect_paras = set(coverage.paragraphs_with("COLLECT"))
    for para in doc.paragraphs:
        if para.index not in collect_paras:
            continue
        for sentence in para.sentences:
            if not COLLECTION_VERB.search(sentence.text):
                continue
            norm = normalize_phrase(sentence.text)
            matched = False
            for dt, phrase, rx in compiled:
                if rx.search(norm):
                    specific.add(dt)
                    evidence.append((sentence.text, phrase))
                    matched = True
            if not matched:
                for term, rx in vague_res:
                    if rx.search(norm):
                        vague = True
                        evidence.append((sentence.text, term))
    return DeclaredSet(frozenset(specific), vague, tuple(evidence))
