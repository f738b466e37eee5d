"""Paragraph / sentence / word segmentation for privacy-policy text."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

WORD = re.compile(r"[^\W_]+(?:['’\-][^\W_]+)*")
PARAGRAPH_BREAK = re.compile(r"\n[ \t\r\f\v]*\n\s*")
# terminal punctuation, optional closing quote/bracket, then whitespace + a
# sentence opener (capital, digit, quote) or end of text
SENTENCE_END = re.compile(r"[.!?]+[\"'’”)\]]*(?=\s+[\"'“(\[]?[A-Z0-9]|\s*$)")

ABBREVIATIONS = frozenset({
    "e.g.", "i.e.", "inc.", "ltd.", "co.", "corp.", "llc.", "mr.", "mrs.", "ms.", "dr.",
    "st.", "vs.", "u.s.", "u.k.", "no.", "jr.", "sr.", "approx.", "dept.", "art.", "sec.",
})

HEADING_MAX_WORDS = 8


def words_of(text: str) -> list[str]:
    return WORD.findall(text)


@dataclass(frozen=True)
class Sentence:
    text: str
    words: tuple[str, ...]


@dataclass(frozen=True)
class Paragraph:
    index: int
    text: str
    heading: str | None
    sentences: tuple[Sentence, ...]

    @property
    def body(self) -> str:
        if self.heading is None:
            return self.text
        return self.text.split("\n", 1)[1] if "\n" in self.text else ""


@dataclass(frozen=True)
class PolicyDoc:
    raw_text: str
    paragraphs: tuple[Paragraph, ...]
    source_url: str | None = field(default=None)

    @property
    def sentences(self) -> list[Sentence]:
        return [s for p in self.paragraphs for s in p.sentences]

    @property
    def words(self) -> list[str]:
        return [w for s in self.sentences for w in s.words]

    @property
    def word_count(self) -> int:
        return sum(len(s.words) for s in self.sentences)


def _is_abbreviation(text: str, end: int) -> bool:
    start = end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    token = text[start:end + 1].lower().lstrip("(\"'“")
    return token in ABBREVIATIONS


def split_sentences(text: str) -> list[str]:
    out, start = [], 0
    for m in SENTENCE_END.finditer(text):
        if m.end() - m.start() == 1 and text[m.start()] == "." and _is_abbreviation(text, m.start()):
            continue
        chunk = text[start:m.end()].strip()
        if chunk:
            out.append(chunk)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        out.append(tail)
    return out


def _looks_like_heading(line: str) -> bool:
    line = line.strip()
    if not line or line[-1] in ".!?,;":
        return False
    return 0 < len(words_of(line)) <= HEADING_MAX_WORDS


def segment(text: str, source_url: str | None = None) -> PolicyDoc:
    paragraphs = []
    carried: str | None = None
    for block in PARAGRAPH_BREAK.split(text.strip()):
        block = block.strip()
        if not block:
            continue
        lines = block.split("\n")
        heading = None
        if len(lines) > 1 and _looks_like_heading(lines[0]):
            heading = lines[0].strip()
            body = "\n".join(lines[1:])
        elif len(lines) == 1 and _looks_like_heading(block):
            # a heading standing alone labels the paragraph that follows it
            sentence = Sentence(block, tuple(words_of(block)))
            paragraphs.append(Paragraph(len(paragraphs), block, block, (sentence,)))
            carried = block
            continue
        else:
            body = block
        sentences = []
        if heading is not None:
            sentences.append(Sentence(heading, tuple(words_of(heading))))
        for s in split_sentences(body):
            sentences.append(Sentence(s, tuple(words_of(s))))
        if heading is None and carried is not None:
            heading = carried
            text_out = f"{carried}\n{block}"
        else:
            text_out = block
        carried = None
        paragraphs.append(Paragraph(len(paragraphs), text_out, heading, tuple(sentences)))
    return PolicyDoc(text, tuple(paragraphs), source_url)
