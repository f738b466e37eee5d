"""Rule-based labeling of policy paragraphs with content components.

Each component has exact heading titles plus strong (weight 2) and weak
(weight 1) patterns. A pattern scores once per paragraph; a match in the
heading counts three times. A paragraph gets every component scoring at
least ``THRESHOLD`` or whose heading is one of the component's titles.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .text import PolicyDoc

COMPONENTS = ("COLLECT", "SHARE", "SECURITY", "RIGHT", "CHILDREN", "REGION", "UPDATE", "PROVIDER",
              "RETENTION", "DATA_USE")
THRESHOLD = 2
HEADING_WEIGHT = 3
STRONG, WEAK = 2, 1

_HEADING_NOISE = re.compile(r"^[\s\d.()ivx]*[.)]\s+|[\s:.\-–]+$", re.IGNORECASE)


@dataclass(frozen=True)
class ComponentRules:
    headings: frozenset[str]
    patterns: tuple[tuple[re.Pattern, int], ...]


@dataclass(frozen=True)
class ComponentCoverage:
    present: frozenset[str]
    paragraph_labels: tuple[tuple[int, str], ...]

    def labels_of(self, index: int) -> set[str]:
        return {c for i, c in self.paragraph_labels if i == index}

    def paragraphs_with(self, component: str) -> list[int]:
        return [i for i, c in self.paragraph_labels if c == component]


@lru_cache(maxsize=1)
def load_rules() -> dict[str, ComponentRules]:
    raw = json.loads(resources.files("vrprivacy.data").joinpath("components.json").read_text("utf-8"))
    rules = {}
    for comp in COMPONENTS:
        entry = raw[comp]
        pats = [(re.compile(p, re.IGNORECASE), STRONG) for p in entry["strong"]]
        pats += [(re.compile(p, re.IGNORECASE), WEAK) for p in entry["weak"]]
        rules[comp] = ComponentRules(frozenset(h.lower() for h in entry["headings"]), tuple(pats))
    return rules


def normalize_heading(heading: str) -> str:
    return _HEADING_NOISE.sub("", heading.strip()).lower().replace("’", "'")


def score_paragraph(heading: str | None, body: str, rules: ComponentRules) -> int:
    score = 0
    for pattern, weight in rules.patterns:
        if heading and pattern.search(heading):
            score += weight * HEADING_WEIGHT
        elif pattern.search(body):
            score += weight
    return score


def label_paragraph(heading: str | None, body: str) -> set[str]:
    labels = set()
    norm = normalize_heading(heading) if heading else None
    for comp, rules in load_rules().items():
        if norm is not None and norm in rules.headings:
            labels.add(comp)
        elif score_paragraph(heading, body, rules) >= THRESHOLD:
            labels.add(comp)
    return labels


def classify_components(doc: PolicyDoc) -> ComponentCoverage:
    labels = []
    for para in doc.paragraphs:
        body = para.body
        if not body.strip():
            continue  # heading-only; its title is carried onto the next paragraph
        for comp in COMPONENTS:
            if comp in label_paragraph(para.heading, body):
                labels.append((para.index, comp))
    return ComponentCoverage(frozenset(c for _, c in labels), tuple(labels))
