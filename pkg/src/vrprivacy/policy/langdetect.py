"""Language identification by character-trigram rank profiles.

Chinese, Japanese and Korean are decided by Unicode block counts before any
profile comparison; everything else uses the out-of-place distance between
the text's ranked trigrams and each shipped profile.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from functools import lru_cache
from importlib import resources

UNKNOWN = "Unknown"
LANGUAGES = ("en", "zh", "ja", "de", "fr", "vi", "es", "ko")
MIN_CHARS = 40
PROFILE_SIZE = 300
CJK_MAJORITY = 0.5
HAN_ZH_SHARE = 0.8
KANA_JA_SHARE = 0.1

_NON_LETTER = re.compile(r"[\W\d_]+")


def _block(ch: str) -> str | None:
    o = ord(ch)
    if 0xAC00 <= o <= 0xD7AF or 0x1100 <= o <= 0x11FF or 0x3130 <= o <= 0x318F:
        return "hangul"
    if 0x3040 <= o <= 0x30FF or 0x31F0 <= o <= 0x31FF:
        return "kana"
    if 0x4E00 <= o <= 0x9FFF or 0x3400 <= o <= 0x4DBF or 0xF900 <= o <= 0xFAFF:
        return "han"
    return None


def trigrams(text: str) -> Counter:
    counts: Counter = Counter()
    for word in _NON_LETTER.split(text.lower()):
        if word:
            padded = f"_{word}_"
            counts.update(padded[i:i + 3] for i in range(len(padded) - 2))
    return counts


def ranked_profile(text: str, size: int = PROFILE_SIZE) -> list[str]:
    counts = trigrams(text)
    return [g for g, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:size]]


def out_of_place(doc: list[str], profile: list[str]) -> int:
    ranks = {g: i for i, g in enumerate(profile)}
    penalty = len(profile)
    return sum(abs(i - ranks[g]) if g in ranks else penalty for i, g in enumerate(doc))


@lru_cache(maxsize=1)
def load_profiles() -> dict[str, list[str]]:
    text = resources.files("vrprivacy.data").joinpath("lang_profiles.json").read_text("utf-8")
    return json.loads(text)


def _cjk_language(text: str) -> str | None:
    letters = [ch for ch in text if ch.isalpha()]
    if not letters:
        return None
    blocks = Counter(_block(ch) for ch in letters)
    cjk = blocks["hangul"] + blocks["kana"] + blocks["han"]
    if cjk / len(letters) <= CJK_MAJORITY:
        return None
    if blocks["hangul"] * 2 > cjk:
        return "ko"
    if blocks["han"] / len(letters) >= HAN_ZH_SHARE:
        return "zh"
    return "ja" if blocks["kana"] / cjk >= KANA_JA_SHARE else "zh"


def detect_language(text: str) -> str:
    text = text.strip()
    if len(text) < MIN_CHARS:
        return UNKNOWN
    cjk = _cjk_language(text)
    if cjk:
        return cjk
    doc = ranked_profile(text)
    if not doc:
        return UNKNOWN
    profiles = load_profiles()
    return min(sorted(profiles), key=lambda lang: out_of_place(doc, profiles[lang]))
