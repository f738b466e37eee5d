import random
import re

from hypothesis import given, strategies as st

from vrprivacy.policy.text import segment, split_sentences, words_of

WORDS = ["data", "we", "collect", "your", "device", "information", "share", "partners", "it's",
         "third-party", "account", "2024", "cookies", "location", "VR", "retain", "O'Brien"]

sentence_st = st.lists(st.sampled_from(WORDS), min_size=1, max_size=15).map(
    lambda ws: " ".join([ws[0].capitalize()] + ws[1:]) + ".")


def test_two_sentences():
    doc = segment("We collect data. We share it.")
    assert [s.text for s in doc.sentences] == ["We collect data.", "We share it."]
    assert doc.word_count == 6


def test_empty():
    doc = segment("")
    assert doc.sentences == [] and doc.word_count == 0


def test_abbreviations_do_not_split():
    text = "We share data with vendors, e.g. Acme Inc. Their staff may see it. Contact Dr. Smith today."
    assert split_sentences(text) == [
        "We share data with vendors, e.g. Acme Inc. Their staff may see it.",
        "Contact Dr. Smith today.",
    ]


def test_question_and_exclamation():
    assert split_sentences("Do we sell data? No! Never.") == ["Do we sell data?", "No!", "Never."]


def test_lowercase_after_period_does_not_split():
    assert len(split_sentences("Version 2.0 is out. see below for details.")) == 1


def test_word_shapes():
    assert words_of("third-party cookies, it's O’Brien's -- 3.5 x_y") == [
        "third-party", "cookies", "it's", "O’Brien's", "3", "5", "x", "y"]


def test_headings_attach_to_paragraph():
    doc = segment("Children\n\nWe do not collect data from kids.\n\nRetention\nWe keep it briefly.")
    assert [p.heading for p in doc.paragraphs] == ["Children", "Children", "Retention"]
    assert doc.paragraphs[1].body == "We do not collect data from kids."
    assert doc.paragraphs[2].body == "We keep it briefly."


def _regex_oracle(text: str) -> tuple[int, int]:
    sentences = [s for s in re.split(r"(?<=[.!?])\s+(?=[A-Z0-9])", text.strip()) if s]
    words = re.findall(r"[A-Za-z0-9]+(?:['\-][A-Za-z0-9]+)*", text)
    return len(sentences), len(words)


def test_fifty_sentences_match_regex_oracle():
    rng = random.Random(11)
    sents = []
    for _ in range(50):
        ws = [rng.choice(WORDS) for _ in range(rng.randint(1, 14))]
        sents.append(" ".join([ws[0].capitalize()] + ws[1:]) + rng.choice(".!?"))
    text = " ".join(sents)
    doc = segment(text)
    assert (len(doc.sentences), doc.word_count) == _regex_oracle(text)
    assert len(doc.sentences) == 50


@given(st.lists(st.lists(sentence_st, min_size=1, max_size=5), min_size=1, max_size=6))
def test_tokens_cover_raw_text(paras):
    text = "\n\n".join(" ".join(p) for p in paras)
    doc = segment(text)
    assert doc.words == words_of(text)
    assert len(doc.sentences) == sum(len(p) for p in paras)


@given(st.lists(st.lists(sentence_st, min_size=1, max_size=4), min_size=1, max_size=5), st.randoms())
def test_counts_stable_under_paragraph_reordering(paras, rnd):
    blocks = [" ".join(p) for p in paras]
    before = segment("\n\n".join(blocks))
    rnd.shuffle(blocks)
    after = segment("\n\n".join(blocks))
    assert (before.word_count, len(before.sentences)) == (after.word_count, len(after.sentences))
