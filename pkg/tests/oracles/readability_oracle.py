"""Readability metrics from a known sentence/word structure.

Shares no code with the package: syllables are counted with a character
loop, and the caller supplies sentences as lists of words.
"""

VOWELS = "aeiouy"


def syllables(word: str) -> int:
    w = [c for c in word.lower() if c.isalpha()]
    count, prev_vowel = 0, False
    for c in w:
        is_vowel = c in VOWELS
        if is_vowel and not prev_vowel:
            count += 1
        prev_vowel = is_vowel
    if len(w) >= 1 and w[-1] == "e" and not (len(w) >= 2 and w[-2] == "l") and count > 1:
        count -= 1
    return max(count, 1)


def metrics(sentences: list[list[str]]) -> dict:
    words = [w for s in sentences for w in s]
    wc, sc = len(words), len(sentences)
    letters = sum(sum(1 for c in w if c.isalpha()) for w in words)
    syl = sum(syllables(w) for w in words)
    long_words = sum(1 for w in words if sum(1 for c in w if c.isalpha()) > 6)
    return {
        "ari": 4.71 * letters / wc + 0.5 * wc / sc - 21.43,
        "fres": 206.835 - 1.015 * wc / sc - 84.6 * syl / wc,
        "lix": wc / sc + 100 * long_words / wc,
        "sc": sc, "wc": wc,
        "rt_seconds": wc * 60 / 238,
        "st_seconds": wc * 60 / 130,
    }
