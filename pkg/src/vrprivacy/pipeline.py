"""Per-app analysis: APK -> BehavioralProfile, policy text -> DeclarativeProfile."""

from __future__ import annotations

import logging
import posixpath
from dataclasses import dataclass
from pathlib import Path

from . import apk as apk_model
from .apk import EngineKind
from .callgraph import extract_call_edges, presence_evidence, reach_sensitive
from .catalog import ANY_STORE, ApiRule, SensitivityCatalog, lookup, rules_by_kind
from .compliance import AnalysisStatus, AppRecord, BehavioralProfile, DeclarativeProfile
from .dotnet import parse_dotnet_names
from .errors import (UNREAL_UNSUPPORTED, AnalysisError, EmptyInput, MalformedIni, MalformedPluginJson, NoPakEntry,
                     TruncatedHeader)
from .il2cpp import ParseMode, parse_global_metadata
from .manifest import parse_manifest
from .policy import DEFAULT_STORE_POLICY_URLS, PolicyAnalysis, analyze_policy_text
from .unreal import detect_sensitive_config, parse_pak_index, read_config_and_plugins, unwrap_obb

log = logging.getLogger(__name__)

METADATA_SUFFIX = "managed/metadata/global-metadata.dat"
OBB_SUFFIXES = (".obb", ".obb.png")


@dataclass(frozen=True)
class _Outcome:
    status: AnalysisStatus
    accesses: tuple = ()
    notes: tuple[str, ...] = ()


def rules_for(catalog: SensitivityCatalog, store: str | None, engine: EngineKind) -> list[ApiRule]:
    """Catalog rules for an app; stores the catalog does not cover get every store's rules."""
    known = {r.store for r in catalog.api_rules} - {ANY_STORE}
    if store in known:
        return lookup(catalog, store, engine)
    family = engine.family
    seen, out = set(), []
    for r in catalog.api_rules:
        key = (r.data_type, r.kind, r.name)
        if r.engine == family and key not in seen:
            seen.add(key)
            out.append(r)
    return out


def _dedupe(evidence) -> tuple:
    return tuple(sorted(set(evidence), key=lambda e: (e.data_type, e.api_name, e.path)))


def _analyze_unreal(pkg, rules) -> _Outcome:
    try:
        paks = sorted(p for p in pkg.entries if p.lower().endswith(".pak"))
        obbs = sorted(p for p in pkg.entries if p.lower().endswith(OBB_SUFFIXES))
        if paks:
            if len(paks) > 1:
                log.info("%s: %d pak files, using %s", pkg.source, len(paks), paks[0])
            pak = apk_model.extract_entry(pkg, paks[0])
        elif obbs:
            pak = unwrap_obb(apk_model.extract_entry(pkg, obbs[0]))
        else:
            raise NoPakEntry("no .pak or .obb in the apk")
        index = parse_pak_index(pak)
        cfg, plugins = read_config_and_plugins(pak, index)
    except (*UNREAL_UNSUPPORTED, MalformedIni, MalformedPluginJson) as exc:
        return _Outcome(AnalysisStatus.LacksFiles, notes=(f"unreal: {exc.code}: {exc}",))
    evidence = detect_sensitive_config(cfg, plugins, rules)
    notes = () if cfg is not None else ("unreal: no DefaultEngine.ini in pak",)
    return _Outcome(AnalysisStatus.Complete, _dedupe(evidence), notes)


def _find(pkg, predicate) -> str | None:
    hits = sorted(p for p in pkg.entries if predicate(p))
    return hits[0] if hits else None


def _analyze_il2cpp(pkg, rules) -> _Outcome:
    libs = sorted(p for p in pkg.entries if p.startswith("lib/") and posixpath.basename(p) == "libil2cpp.so")
    # only the AArch64 decoder exists, so prefer the arm64 build
    lib = next((p for p in libs if "arm64" in p), libs[0] if libs else None)
    meta = _find(pkg, lambda p: p.lower().endswith(METADATA_SUFFIX))
    if lib is None or meta is None:
        return _Outcome(AnalysisStatus.LacksFiles, notes=("il2cpp: missing libil2cpp.so or global-metadata.dat",))
    try:
        table = parse_global_metadata(apk_model.extract_entry(pkg, meta))
    except (EmptyInput, TruncatedHeader) as exc:
        return _Outcome(AnalysisStatus.LacksFiles, notes=(f"il2cpp: {exc.code}: {exc}",))
    matchable = rules_by_kind(rules, "api", "class")
    if table.parse_mode is ParseMode.STRING_SCAN:
        ev = presence_evidence(table.raw_strings, matchable)
        return _Outcome(AnalysisStatus.Complete, _dedupe(ev), ("il2cpp: metadata layout not recognised; presence-only",))
    try:
        graph = extract_call_edges(apk_model.extract_entry(pkg, lib), table)
    except AnalysisError as exc:
        ev = presence_evidence(table.method_names, matchable)
        return _Outcome(AnalysisStatus.Complete, _dedupe(ev), (f"il2cpp: {exc.code}; presence-only",))
    return _Outcome(AnalysisStatus.Complete, _dedupe(reach_sensitive(graph, matchable)))


def _analyze_mono(pkg, rules) -> _Outcome:
    dlls = sorted(p for p in pkg.entries if p.startswith("assets/") and p.lower().endswith(".dll"))
    names: set[str] = set()
    notes, parsed = [], 0
    for path in dlls:
        try:
            names |= parse_dotnet_names(apk_model.extract_entry(pkg, path))
            parsed += 1
        except AnalysisError as exc:
            notes.append(f"mono: {posixpath.basename(path)}: {exc.code}")
    if not parsed:
        return _Outcome(AnalysisStatus.LacksFiles, notes=tuple(notes) or ("mono: no readable assemblies",))
    ev = presence_evidence(names, rules_by_kind(rules, "api", "class"))
    return _Outcome(AnalysisStatus.Complete, _dedupe(ev), tuple(notes))


ENGINE_ANALYZERS = {
    EngineKind.UNREAL: _analyze_unreal,
    EngineKind.UNITY_IL2CPP: _analyze_il2cpp,
    EngineKind.UNITY_MONO: _analyze_mono,
}


def analyze_package(pkg, catalog: SensitivityCatalog, store: str | None = None,
                    app_id: str | None = None) -> BehavioralProfile:
    """Behavioral profile of an opened APK. Manifest/zip parse errors propagate."""
    app_id = app_id or Path(pkg.source).stem
    notes = []
    if apk_model.MANIFEST_PATH in pkg:
        permissions = parse_manifest(apk_model.extract_entry(pkg, apk_model.MANIFEST_PATH)).permissions
    else:
        permissions = frozenset()
        notes.append("no AndroidManifest.xml")
    markers = apk_model.engine_markers(pkg)
    engine = apk_model.detect_engine(pkg)
    if len(markers) > 1:
        notes.append("engine_detection: heuristic (markers for " + ", ".join(sorted(m.value for m in markers)) + ")")
    analyzer = ENGINE_ANALYZERS.get(engine)
    if analyzer is None:
        outcome = _Outcome(AnalysisStatus.Unsupported, notes=("no Unity or Unreal markers",))
    else:
        outcome = analyzer(pkg, rules_for(catalog, store, engine))
    return BehavioralProfile(app_id, engine, frozenset(permissions), outcome.accesses, outcome.status,
                             tuple(notes) + outcome.notes)


def analyze_apk(path: str | Path, catalog: SensitivityCatalog, store: str | None = None,
                app_id: str | None = None) -> BehavioralProfile:
    return analyze_package(apk_model.open_apk(path), catalog, store, app_id or Path(path).stem)


def failed_profile(app_id: str, status: AnalysisStatus, note: str) -> BehavioralProfile:
    return BehavioralProfile(app_id, EngineKind.UNKNOWN, frozenset(), (), status, (note,))


def analyze_policy(text: str, catalog: SensitivityCatalog, *, app_name: str | None = None,
                   source_url: str | None = None, store_policy_urls=DEFAULT_STORE_POLICY_URLS) -> PolicyAnalysis:
    return analyze_policy_text(text, corpus=catalog.policy_corpus, app_name=app_name, source_url=source_url,
                               store_policy_urls=store_policy_urls)


def declarative_profile(record: AppRecord, policy_text: str | None, catalog: SensitivityCatalog, *,
                        link_status=None, language_coverage=None, notes=()) -> DeclarativeProfile:
    policy = None
    if policy_text is not None:
        policy = analyze_policy(policy_text, catalog, app_name=record.name or None, source_url=record.policy_url)
    return DeclarativeProfile(record.app_id, record, policy, link_status, language_coverage, tuple(notes))
