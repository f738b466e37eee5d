import math
import random

import pytest
from hypothesis import given, strategies as st

from oracles.readability_oracle import metrics
from vrprivacy.errors import EmptyDocument
from vrprivacy.policy import readability, segment
from vrprivacy.policy.readability import count_syllables

VOCAB = ["the", "cat", "privacy", "information", "collect", "table", "make", "we", "rhythm", "use",
         "personal", "identifiable", "data", "share", "able", "queue", "eye", "tracking", "be", "cookie"]


def test_cat_sat():
    r = readability(segment("The cat sat."))
    assert (r.wc, r.sc) == (3, 1)
    assert round(r.fres, 2) == 119.19
    assert round(r.ari, 2) == -5.80
    assert round(r.lix, 1) == 3.0


def test_single_word():
    r = readability(segment("a"))
    assert (r.wps, r.lpw, r.spw) == (1, 1, 1)


def test_reading_times():
    r = readability(segment(" ".join(["word"] * 238) + "."))
    assert r.rt_seconds == pytest.approx(60)
    assert r.st_seconds == pytest.approx(238 / 130 * 60)


def test_empty_raises():
    with pytest.raises(EmptyDocument):
        readability(segment(""))
    with pytest.raises(EmptyDocument):
        readability(segment("... !!!"))


@pytest.mark.parametrize("word, n", [
    ("cat", 1), ("make", 1), ("table", 2), ("the", 1), ("be", 1), ("privacy", 3),
    ("rhythm", 1), ("queue", 1), ("information", 4), ("a", 1), ("2024", 1),
])
def test_syllables(word, n):
    assert count_syllables(word) == n


def _generated(rng, n_words):
    sentences, left = [], n_words
    while left:
        k = min(left, rng.randint(1, 25))
        sentences.append([rng.choice(VOCAB) for _ in range(k)])
        left -= k
    text = " ".join(" ".join([s[0].capitalize()] + s[1:]) + "." for s in sentences)
    return text, sentences


def test_thousand_word_docs_match_oracle():
    rng = random.Random(5)
    for _ in range(100):
        text, sentences = _generated(rng, 1000)
        got = readability(segment(text)).to_dict()
        want = metrics(sentences)
        for key, value in want.items():
            assert math.isclose(got[key], value, rel_tol=0, abs_tol=1e-9), key


@given(st.integers(1, 40), st.integers(1, 8))
def test_fres_decreases_with_syllables(n_words, n_sentences):
    # same word and sentence counts, one-syllable vs three-syllable words
    short = ". ".join(" ".join(["cat"] * n_words) for _ in range(n_sentences)) + "."
    long = ". ".join(" ".join(["cat"] * (n_words - 1) + ["privacy"]) for _ in range(n_sentences)) + "."
    a, b = readability(segment(short)), readability(segment(long))
    assert (a.wc, a.sc) == (b.wc, b.sc)
    assert b.spw > a.spw
    assert b.fres < a.fres


@given(st.lists(st.sampled_from(VOCAB), min_size=1, max_size=60))
def test_report_invariants(words):
    r = readability(segment(" ".join(words) + "."))
    assert r.wc >= r.sc >= 1
    assert all(math.isfinite(v) for v in (r.ari, r.fres, r.lix, r.lpw, r.spw, r.wps))
