"""Privacy-policy text analysis."""

from __future__ import annotations

from dataclasses import dataclass

from .checks import (DEFAULT_STORE_POLICY_URLS, DeclaredSet, Validity, child_age_candidates,
                     extract_child_age, extract_declared_datatypes, specificity_check, validity_check)
from .components import COMPONENTS, ComponentCoverage, classify_components
from .langdetect import UNKNOWN, detect_language
from .readability import ReadabilityReport, readability
from .text import Paragraph, PolicyDoc, Sentence, segment

__all__ = [
    "COMPONENTS", "DEFAULT_STORE_POLICY_URLS", "UNKNOWN", "ComponentCoverage", "DeclaredSet", "Paragraph",
    "PolicyAnalysis", "PolicyDoc", "ReadabilityReport", "Sentence", "Validity", "analyze_policy_text",
    "child_age_candidates", "classify_components", "detect_language", "extract_child_age",
    "extract_declared_datatypes", "readability", "segment", "specificity_check", "validity_check",
]


@dataclass(frozen=True)
class PolicyAnalysis:
    validity: Validity
    vr_specific: bool
    vr_hits: tuple[str, ...]
    readability: ReadabilityReport | None
    coverage: ComponentCoverage
    child_age: int | None
    child_age_candidates: tuple[int, ...]
    declared: DeclaredSet
    language: str

    def to_dict(self) -> dict:
        return {
            "validity": self.validity.value,
            "vr_specific": self.vr_specific,
            "vr_hits": list(self.vr_hits),
            "readability": self.readability.to_dict() if self.readability else None,
            "components": sorted(self.coverage.present),
            "child_age": self.child_age,
            "child_age_candidates": list(self.child_age_candidates),
            "declared_specific": sorted(self.declared.specific),
            "declared_vague": self.declared.vague,
            "declared_evidence": [list(e) for e in self.declared.evidence],
            "language": self.language,
        }


def analyze_policy_text(text: str, *, corpus, app_name: str | None = None, source_url: str | None = None,
                        store_policy_urls=DEFAULT_STORE_POLICY_URLS) -> PolicyAnalysis:
    doc = segment(text, source_url=source_url)
    coverage = classify_components(doc)
    vr, hits = specificity_check(doc, app_name)
    report = readability(doc) if doc.word_count else None
    return PolicyAnalysis(
        validity=validity_check(doc, store_policy_urls),
        vr_specific=vr,
        vr_hits=tuple(hits),
        readability=report,
        coverage=coverage,
        child_age=extract_child_age(doc, coverage),
        child_age_candidates=tuple(child_age_candidates(doc, coverage)),
        declared=extract_declared_datatypes(doc, coverage, corpus),
        language=detect_language(text),
    )
