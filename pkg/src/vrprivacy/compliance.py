"""Store records, behavioral/declarative profiles, cross-checks and reporting."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from types import MappingProxyType
from typing import Any, Iterable, Mapping

from .apk import EngineKind
from .errors import EmptyRunSet, SchemaViolation, UnknownStore
from .evidence import DATA_TYPES, AccessEvidence

STORES = ("Oculus", "Viveport", "Pico", "Microsoft", "PlayStation")
REPORT_SCHEMA = "report_v1"
DEFAULT_BENIGN_PERMISSIONS = frozenset({"INTERNET", "ACCESS_NETWORK_STATE"})
VENDOR_PREFIXES = {"com.oculus.permission.": "Oculus", "com.picovr.permission.": "Pico"}

RECORD_FIELDS = ("app_id", "store", "name", "age_rating", "category", "declared_permissions",
                 "supported_languages", "policy_url", "play_style", "environment_requirement")


class AnalysisStatus(str, Enum):
    Complete = "Complete"
    LacksFiles = "LacksFiles"
    Unsupported = "Unsupported"


class Severity(str, Enum):
    Info = "Info"
    Warn = "Warn"
    Violation = "Violation"


SEVERITY = {
    "F_PERM_DISCREPANCY": Severity.Warn,
    "F_CROSS_PLATFORM_PERM": Severity.Warn,
    "F_CHILD_INCONSISTENCY": Severity.Warn,
    "F_CHILD_DISCREPANCY": Severity.Violation,
    "F_BEHAVIOR_UNDECLARED": Severity.Violation,
    "F_BEHAVIOR_VAGUE": Severity.Warn,
    "F_POLICY_INVALID": Severity.Violation,
    "F_POLICY_NOT_VR": Severity.Info,
    "F_LINK_BROKEN": Severity.Violation,
    "F_LANG_GAP": Severity.Info,
}
FINDING_CODES = tuple(SEVERITY)


@dataclass(frozen=True)
class AppRecord:
    app_id: str
    store: str
    name: str = ""
    age_rating: int | str | None = None
    category: str = ""
    # None: the store page does not disclose permissions at all
    declared_permissions: frozenset[str] | None = None
    supported_languages: frozenset[str] = frozenset()
    policy_url: str | None = None
    play_style: str | None = None
    environment_requirement: str | None = None
    extras: Mapping[str, Any] = field(default_factory=lambda: MappingProxyType({}), compare=False)

    def __post_init__(self):
        if self.store not in STORES:
            raise UnknownStore(f"{self.app_id}: store {self.store!r} is not one of {STORES}")
        if not (self.age_rating is None or self.age_rating == "all"
                or (isinstance(self.age_rating, int) and self.age_rating >= 0)):
            raise SchemaViolation(f"{self.app_id}: age_rating {self.age_rating!r}")

    def to_dict(self) -> dict:
        out = {
            "app_id": self.app_id,
            "store": self.store,
            "name": self.name,
            "age_rating": self.age_rating,
            "category": self.category,
            "declared_permissions": None if self.declared_permissions is None else sorted(self.declared_permissions),
            "supported_languages": sorted(self.supported_languages),
            "policy_url": self.policy_url,
            "play_style": self.play_style,
            "environment_requirement": self.environment_requirement,
        }
        out.update(self.extras)
        return out


def _str_set(value, where: str, allow_none: bool = False):
    if value is None and allow_none:
        return None
    if value is None:
        return frozenset()
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaViolation(f"{where}: expected a list of strings")
    return frozenset(v.strip() for v in value if v.strip())


def _opt_str(value, where: str):
    if value is not None and not isinstance(value, str):
        raise SchemaViolation(f"{where}: expected string or null")
    return value


def _age(value, where: str):
    if value is None or value == "all":
        return value
    if isinstance(value, bool):
        raise SchemaViolation(f"{where}: expected integer, \"all\" or null")
    if isinstance(value, int) and value >= 0:
        return value
    if isinstance(value, str) and value.rstrip("+").isdigit():
        return int(value.rstrip("+"))
    raise SchemaViolation(f"{where}: expected integer, \"all\" or null, got {value!r}")


def record_from_dict(obj: Mapping, where: str = "$") -> AppRecord:
    if not isinstance(obj, Mapping):
        raise SchemaViolation(f"{where}: expected object")
    for key in ("app_id", "store"):
        if not isinstance(obj.get(key), str) or not obj[key].strip():
            raise SchemaViolation(f"{where}.{key}: required non-empty string")
    return AppRecord(
        app_id=obj["app_id"].strip(),
        store=obj["store"],
        name=_opt_str(obj.get("name"), f"{where}.name") or "",
        age_rating=_age(obj.get("age_rating"), f"{where}.age_rating"),
        category=_opt_str(obj.get("category"), f"{where}.category") or "",
        declared_permissions=_str_set(obj.get("declared_permissions"), f"{where}.declared_permissions",
                                      allow_none=True),
        supported_languages=_str_set(obj.get("supported_languages"), f"{where}.supported_languages"),
        policy_url=_opt_str(obj.get("policy_url"), f"{where}.policy_url"),
        play_style=_opt_str(obj.get("play_style"), f"{where}.play_style"),
        environment_requirement=_opt_str(obj.get("environment_requirement"), f"{where}.environment_requirement"),
        extras=MappingProxyType({k: v for k, v in obj.items() if k not in RECORD_FIELDS}),
    )


def ingest_records(text: str | bytes) -> list[AppRecord]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"$: not valid JSON ({exc})") from None
    if not isinstance(doc, list):
        raise SchemaViolation("$: expected a JSON array of records")
    records = [record_from_dict(obj, f"$[{i}]") for i, obj in enumerate(doc)]
    seen = Counter(r.app_id for r in records)
    dupes = sorted(a for a, n in seen.items() if n > 1)
    if dupes:
        raise SchemaViolation(f"$: duplicate app_id {dupes}")
    return records


def serialize_records(records: Iterable[AppRecord]) -> str:
    return json.dumps([r.to_dict() for r in records], indent=2, ensure_ascii=False)


@dataclass(frozen=True)
class BehavioralProfile:
    app_id: str
    engine: EngineKind
    manifest_permissions: frozenset[str] = frozenset()
    accesses: tuple[AccessEvidence, ...] = ()
    analysis_status: AnalysisStatus = AnalysisStatus.Complete
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.analysis_status is not AnalysisStatus.Complete and self.accesses:
            raise ValueError("accesses must be empty unless analysis is Complete")

    @property
    def data_types(self) -> set[str]:
        return {e.data_type for e in self.accesses}

    def to_dict(self) -> dict:
        return {
            "app_id": self.app_id,
            "engine": self.engine.value,
            "analysis_status": self.analysis_status.value,
            "manifest_permissions": sorted(self.manifest_permissions),
            "accesses": [e.to_dict() for e in sorted(self.accesses, key=lambda e: (e.data_type, e.api_name, e.path))],
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class DeclarativeProfile:
    app_id: str
    record: AppRecord
    # None when no policy text was available
    policy: Any = None
    link_status: Any = None
    language_coverage: Mapping[str, str] | None = None
    notes: tuple[str, ...] = ()

    @property
    def coverage_present(self) -> frozenset[str] | None:
        return None if self.policy is None else self.policy.coverage.present

    def to_dict(self) -> dict:
        return {
            "policy": None if self.policy is None else self.policy.to_dict(),
            "link_status": None if self.link_status is None else self.link_status.to_dict(),
            "language_coverage": None if self.language_coverage is None else dict(sorted(self.language_coverage.items())),
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class Finding:
    code: str
    app_id: str
    evidence: tuple[str, ...]

    def __post_init__(self):
        if self.code not in SEVERITY:
            raise ValueError(f"unknown finding code {self.code!r}")
        if not self.evidence:
            raise ValueError("finding evidence must be non-empty")

    @property
    def severity(self) -> Severity:
        return SEVERITY[self.code]

    def to_dict(self) -> dict:
        return {"code": self.code, "severity": self.severity.value, "evidence": list(self.evidence)}


def short_permission(name: str) -> str:
    return name.strip().rsplit(".", 1)[-1].upper()


def check_permission_discrepancy(profile: BehavioralProfile, record: AppRecord,
                                 benign: Iterable[str] = DEFAULT_BENIGN_PERMISSIONS) -> list[Finding]:
    if record.declared_permissions is None:
        return []
    declared = {short_permission(p) for p in record.declared_permissions}
    benign = {short_permission(p) for p in benign}
    missing = sorted({p for p in profile.manifest_permissions
                      if short_permission(p) not in declared and short_permission(p) not in benign})
    if not missing:
        return []
    return [Finding("F_PERM_DISCREPANCY", profile.app_id, tuple(missing))]


def permission_vendor(name: str) -> str | None:
    for prefix, vendor in VENDOR_PREFIXES.items():
        if name.startswith(prefix):
            return vendor
    return None


def check_cross_platform_permissions(profile: BehavioralProfile, record: AppRecord) -> list[Finding]:
    foreign = sorted(p for p in profile.manifest_permissions
                     if permission_vendor(p) not in (None, record.store))
    if not foreign:
        return []
    return [Finding("F_CROSS_PLATFORM_PERM", profile.app_id,
                    tuple(f"{p} ({permission_vendor(p)} permission in a {record.store} app)" for p in foreign))]


def check_children(declarative: DeclarativeProfile) -> list[Finding]:
    rating = declarative.record.age_rating
    policy = declarative.policy
    if rating is None or policy is None:
        return []
    out = []
    if rating == "all" and "CHILDREN" not in policy.coverage.present:
        out.append(Finding("F_CHILD_INCONSISTENCY", declarative.app_id,
                           ("age rating 'all' but policy has no children's section",)))
    if isinstance(rating, int) and policy.child_age is not None and rating > policy.child_age:
        out.append(Finding("F_CHILD_DISCREPANCY", declarative.app_id,
                           (f"store age rating {rating} exceeds policy age limit {policy.child_age}",)))
    return out


def check_behavior_declaration(behavioral: BehavioralProfile, declarative: DeclarativeProfile) -> list[Finding]:
    if behavioral.analysis_status is not AnalysisStatus.Complete:
        return []
    policy = declarative.policy
    specific = policy.declared.specific if policy is not None else frozenset()
    vague = policy.declared.vague if policy is not None else False
    by_type: dict[str, list[str]] = defaultdict(list)
    for e in behavioral.accesses:
        by_type[e.data_type].append(e.api_name)
    out = []
    for data_type in sorted(by_type, key=DATA_TYPES.index):
        if data_type in specific:
            continue
        apis = ", ".join(sorted(set(by_type[data_type])))
        if vague:
            out.append(Finding("F_BEHAVIOR_VAGUE", behavioral.app_id,
                               (f"{data_type} accessed via {apis}; policy only uses vague terms",)))
        else:
            out.append(Finding("F_BEHAVIOR_UNDECLARED", behavioral.app_id,
                               (f"{data_type} accessed via {apis}; not declared in policy",)))
    return out


def check_policy(declarative: DeclarativeProfile) -> list[Finding]:
    app = declarative.app_id
    policy = declarative.policy
    out = []
    if policy is None:
        out.append(Finding("F_POLICY_INVALID", app, ("no privacy policy text available",)))
    elif policy.validity.value != "Valid":
        wc = policy.readability.wc if policy.readability else 0
        out.append(Finding("F_POLICY_INVALID", app, (f"{policy.validity.value} ({wc} words)",)))
    elif not policy.vr_specific:
        out.append(Finding("F_POLICY_NOT_VR", app, ("policy mentions no VR term and not the app name",)))
    link = declarative.link_status
    if link is not None and link.status.value != "Ok":
        out.append(Finding("F_LINK_BROKEN", app, (f"{link.url}: {link.label}",)))
    if declarative.language_coverage:
        missing = sorted(lang for lang, cov in declarative.language_coverage.items() if cov != "Covered")
        if missing:
            out.append(Finding("F_LANG_GAP", app, tuple(f"no policy found in claimed language {m}" for m in missing)))
    return out


def run_checks(behavioral: BehavioralProfile, declarative: DeclarativeProfile,
               benign: Iterable[str] = DEFAULT_BENIGN_PERMISSIONS) -> list[Finding]:
    record = declarative.record
    findings = []
    if behavioral.analysis_status is AnalysisStatus.Complete:
        findings += check_permission_discrepancy(behavioral, record, benign)
        findings += check_cross_platform_permissions(behavioral, record)
    findings += check_children(declarative)
    findings += check_behavior_declaration(behavioral, declarative)
    findings += check_policy(declarative)
    return sorted(findings, key=lambda f: (FINDING_CODES.index(f.code), f.evidence))


@dataclass(frozen=True)
class AppAudit:
    behavioral: BehavioralProfile
    declarative: DeclarativeProfile
    findings: tuple[Finding, ...]

    @property
    def app_id(self) -> str:
        return self.behavioral.app_id

    def to_dict(self) -> dict:
        rec = self.declarative.record
        return {
            "app_id": self.app_id,
            "store": rec.store,
            "name": rec.name,
            "category": rec.category,
            "age_rating": rec.age_rating,
            "behavioral": self.behavioral.to_dict(),
            "declarative": self.declarative.to_dict(),
            "findings": [f.to_dict() for f in self.findings],
        }


def percent(num: int, den: int) -> float | None:
    if den == 0:
        return None
    value = (Decimal(num) * 100 / Decimal(den)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
    return float(value)


def ratio(num: int, den: int) -> dict:
    return {"count": num, "denominator": den, "percent": percent(num, den)}


def engine_family(engine: EngineKind) -> str:
    return engine.family or "Other"


ENGINE_FAMILIES = ("Unity", "Unreal", "Other")
VALIDITY_CLASSES = ("Valid", "TooShort", "StoreGeneric", "Missing")


def aggregate_report(audits: Iterable[AppAudit], notes: Iterable[str] = ()) -> dict:
    audits = sorted(audits, key=lambda a: a.app_id)
    if not audits:
        raise EmptyRunSet("no audits to aggregate")
    stores = [s for s in STORES if any(a.declarative.record.store == s for a in audits)]

    data_access, analysis = [], []
    for store in stores:
        for family in ENGINE_FAMILIES:
            group = [a for a in audits if a.declarative.record.store == store
                     and engine_family(a.behavioral.engine) == family]
            if not group:
                continue
            statuses = Counter(a.behavioral.analysis_status for a in group)
            complete = [a for a in group if a.behavioral.analysis_status is AnalysisStatus.Complete]
            analysis.append({
                "store": store, "engine": family, "apps": len(group),
                "complete": statuses[AnalysisStatus.Complete],
                "lacks_files": ratio(statuses[AnalysisStatus.LacksFiles], len(group)),
                "unsupported": ratio(statuses[AnalysisStatus.Unsupported], len(group)),
            })
            for data_type in DATA_TYPES:
                accessing = [a for a in complete if data_type in a.behavioral.data_types]
                declared = [a for a in accessing if a.declarative.policy is not None
                            and data_type in a.declarative.policy.declared.specific]
                data_access.append({
                    "store": store, "engine": family, "data_type": data_type,
                    "access": ratio(len(accessing), len(complete)),
                    "declared": ratio(len(declared), len(accessing)),
                })

    policy_rows = []
    for store in stores:
        group = [a for a in audits if a.declarative.record.store == store]
        validity = Counter(a.declarative.policy.validity.value if a.declarative.policy else "Missing" for a in group)
        vr = sum(1 for a in group if a.declarative.policy is not None and a.declarative.policy.vr_specific)
        probed = [a.declarative.link_status for a in group if a.declarative.link_status is not None]
        links = Counter(p.label for p in probed)
        policy_rows.append({
            "store": store, "apps": len(group),
            "validity": {v: ratio(validity[v], len(group)) for v in VALIDITY_CLASSES},
            "vr_specific": ratio(vr, len(group)),
            "link_status": {k: ratio(links[k], len(probed)) for k in sorted(links)},
            "links_probed": len(probed),
        })

    children_rows = []
    for store in stores:
        cats = sorted({a.declarative.record.category for a in audits
                       if a.declarative.record.store == store and a.declarative.record.category})
        for cat in cats:
            group = [a for a in audits if a.declarative.record.store == store and a.declarative.record.category == cat]
            codes = [{f.code for f in a.findings} for a in group]
            children_rows.append({
                "store": store, "category": cat, "apps": len(group),
                "inconsistency": ratio(sum("F_CHILD_INCONSISTENCY" in c for c in codes), len(group)),
                "discrepancy": ratio(sum("F_CHILD_DISCREPANCY" in c for c in codes), len(group)),
            })

    finding_counts = Counter(f.code for a in audits for f in a.findings)
    return {
        "schema": REPORT_SCHEMA,
        "apps": [a.to_dict() for a in audits],
        "summary": {
            "total_apps": len(audits),
            "analysis_status": analysis,
            "data_access": data_access,
            "policy": policy_rows,
            "children": children_rows,
            "findings": {code: finding_counts[code] for code in FINDING_CODES},
        },
        "notes": sorted(set(notes)),
    }


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _pct(r: dict) -> str:
    p = r["percent"]
    return f"{r['count']}/{r['denominator']}" + ("" if p is None else f" ({p:.1f}%)")


def report_rows(report: dict) -> list[tuple[str, list[str], list[list[str]]]]:
    """(title, header, rows) for each summary table, in display order."""
    s = report["summary"]
    tables = [
        ("Analysis status", ["store", "engine", "apps", "complete", "lacks_files", "unsupported"],
         [[r["store"], r["engine"], str(r["apps"]), str(r["complete"]), _pct(r["lacks_files"]), _pct(r["unsupported"])]
          for r in s["analysis_status"]]),
        ("VR data access", ["store", "engine", "data_type", "access", "declared"],
         [[r["store"], r["engine"], r["data_type"], _pct(r["access"]), _pct(r["declared"])] for r in s["data_access"]]),
        ("Policies", ["store", "apps"] + [f"validity_{v}" for v in VALIDITY_CLASSES] + ["vr_specific", "links_probed"],
         [[r["store"], str(r["apps"])] + [_pct(r["validity"][v]) for v in VALIDITY_CLASSES]
          + [_pct(r["vr_specific"]), str(r["links_probed"])] for r in s["policy"]]),
        ("Children", ["store", "category", "apps", "inconsistency", "discrepancy"],
         [[r["store"], r["category"], str(r["apps"]), _pct(r["inconsistency"]), _pct(r["discrepancy"])]
          for r in s["children"]]),
        ("Findings", ["code", "severity", "count"],
         [[code, SEVERITY[code].value, str(n)] for code, n in s["findings"].items()]),
    ]
    link_rows = [[r["store"], status, _pct(v)] for r in s["policy"] for status, v in r["link_status"].items()]
    if link_rows:
        tables.insert(3, ("Link status", ["store", "status", "share"], link_rows))
    return tables


def render_table(report: dict) -> str:
    out = []
    for title, header, rows in report_rows(report):
        widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
        out.append(title)
        out.append("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
        out.append("  ".join("-" * w for w in widths))
        out.extend("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows)
        out.append("")
    for note in report.get("notes", []):
        out.append(f"note: {note}")
    return "\n".join(out).rstrip() + "\n"


def render_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "key", "metric", "count", "denominator", "percent"])
    s = report["summary"]
    for r in s["analysis_status"]:
        key = f"{r['store']}/{r['engine']}"
        w.writerow(["analysis_status", key, "apps", r["apps"], "", ""])
        w.writerow(["analysis_status", key, "complete", r["complete"], r["apps"], ""])
        for m in ("lacks_files", "unsupported"):
            w.writerow(["analysis_status", key, m, r[m]["count"], r[m]["denominator"], r[m]["percent"]])
    for r in s["data_access"]:
        key = f"{r['store']}/{r['engine']}/{r['data_type']}"
        for m in ("access", "declared"):
            w.writerow(["data_access", key, m, r[m]["count"], r[m]["denominator"], r[m]["percent"]])
    for r in s["policy"]:
        for v in VALIDITY_CLASSES:
            x = r["validity"][v]
            w.writerow(["policy", r["store"], f"validity_{v}", x["count"], x["denominator"], x["percent"]])
        x = r["vr_specific"]
        w.writerow(["policy", r["store"], "vr_specific", x["count"], x["denominator"], x["percent"]])
        for status, x in r["link_status"].items():
            w.writerow(["policy", r["store"], f"link_{status}", x["count"], x["denominator"], x["percent"]])
    for r in s["children"]:
        key = f"{r['store']}/{r['category']}"
        for m in ("inconsistency", "discrepancy"):
            w.writerow(["children", key, m, r[m]["count"], r[m]["denominator"], r[m]["percent"]])
    for code, n in s["findings"].items():
        w.writerow(["findings", code, "count", n, "", ""])
    return buf.getvalue()
