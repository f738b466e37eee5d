"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 input that could not be parsed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .catalog import ENV_VAR, SensitivityCatalog, load_catalog_path
from .compliance import (DEFAULT_BENIGN_PERMISSIONS, AnalysisStatus, AppAudit, AppRecord, aggregate_report,
                         dump_report, ingest_records, render_csv, render_table, run_checks)
from .errors import AnalysisError, ConfigError, InvalidUrl
from .pipeline import analyze_apk, analyze_policy, declarative_profile, failed_profile
from .web_probe import (DEFAULT_CONCURRENCY, DEFAULT_HOST_DELAY_MS, DEFAULT_TIMEOUT_MS, HostThrottle, ProbeConfig,
                        UrllibClient, check_link, check_links, discover_language_variants, page_text)

log = logging.getLogger("vrprivacy")

EXIT_OK, EXIT_CONFIG, EXIT_PARSE = 0, 1, 2
FORMATS = ("json", "table", "csv")

LANGUAGE_CODES = {
    "english": "en", "chinese": "zh", "simplified chinese": "zh", "traditional chinese": "zh", "japanese": "ja",
    "german": "de", "french": "fr", "vietnamese": "vi", "spanish": "es", "korean": "ko",
}


@dataclass(frozen=True)
class RunConfig:
    catalog_path: str | None = None
    records_path: str | None = None
    apk_dir: str | None = None
    policy_dir: str | None = None
    output_path: str | None = None
    format: str = "json"
    live_network: bool = False
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    workers: int = 1
    transcript_path: str | None = None

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.timeout_ms <= 0:
            raise ConfigError("timeout must be positive")


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def _error(code: str, message: str, **extra) -> dict:
    return {"error": {"code": code, "message": message, **extra}}


def _load_catalog(path: str | None) -> SensitivityCatalog:
    path = path or os.environ.get(ENV_VAR)
    if path and not Path(path).is_file():
        raise ConfigError(f"catalog not found: {path}")
    try:
        return load_catalog_path(path)
    except AnalysisError as exc:
        raise ConfigError(f"catalog {path or '<default>'} is invalid: {exc.code}: {exc}") from None


def _client(live: bool, transcript: str | None):
    if transcript:
        from .fixtures.http import TranscriptClient
        return TranscriptClient.from_file(transcript)
    if live:
        return UrllibClient()
    return None


def read_policy_file(path: Path) -> str:
    raw = path.read_bytes().decode("utf-8", "replace")
    if path.suffix.lower() in (".html", ".htm"):
        return page_text(raw)[0]
    return raw


def cmd_analyze_apk(args) -> int:
    catalog = _load_catalog(args.catalog)
    try:
        profile = analyze_apk(args.path, catalog, store=args.store)
    except FileNotFoundError:
        _emit(_error("FileNotFound", f"no such file: {args.path}", path=args.path))
        return EXIT_PARSE
    except AnalysisError as exc:
        _emit(_error(exc.code, str(exc), path=args.path))
        return EXIT_PARSE
    _emit(profile.to_dict())
    return EXIT_OK


def cmd_analyze_policy(args) -> int:
    catalog = _load_catalog(args.catalog)
    try:
        text = read_policy_file(Path(args.path))
    except OSError as exc:
        _emit(_error("Unreadable", str(exc), path=args.path))
        return EXIT_PARSE
    _emit(analyze_policy(text, catalog, app_name=args.app_name, source_url=args.url).to_dict())
    return EXIT_OK


def cmd_check_links(args) -> int:
    urls = list(args.urls)
    if args.urls_file:
        urls += [u.strip() for u in Path(args.urls_file).read_text("utf-8").splitlines() if u.strip()]
    if not urls:
        raise ConfigError("no URLs given")
    client = _client(args.live, args.transcript)
    if client is None:
        raise ConfigError("network access is disabled; pass --live or --transcript FILE")
    config = ProbeConfig(timeout_ms=args.timeout_ms, concurrency=args.concurrency, host_delay_ms=args.host_delay_ms)
    try:
        results = check_links(urls, client, config)
    except InvalidUrl as exc:
        _emit(_error(exc.code, str(exc)))
        return EXIT_PARSE
    rows = [results[u].to_dict() for u in sorted(results)]
    if args.format == "json":
        _emit({"schema": "probe_v1", "results": rows})
    else:
        sep = "," if args.format == "csv" else "  "
        print(sep.join(["url", "status", "elapsed_ms"]))
        for r in rows:
            print(sep.join([r["url"], r["status"], str(r["elapsed_ms"])]))
    return EXIT_OK


def cmd_catalog_validate(args) -> int:
    path = args.path or os.environ.get(ENV_VAR)
    try:
        catalog = load_catalog_path(path)
    except FileNotFoundError:
        _emit(_error("FileNotFound", f"no such file: {path}"))
        return EXIT_CONFIG
    except AnalysisError as exc:
        _emit(_error(exc.code, str(exc), path=path or "<default>"))
        return EXIT_CONFIG
    _emit({"ok": True, "path": path or "<default>", "rules": len(catalog.api_rules),
           "phrases": sum(len(v) for v in catalog.policy_corpus.values())})
    return EXIT_OK


def _language_codes(langs) -> tuple[list[str], list[str]]:
    codes, unknown = set(), []
    for lang in langs:
        low = lang.strip().lower()
        code = low if len(low) == 2 else LANGUAGE_CODES.get(low)
        if code:
            codes.add(code)
        else:
            unknown.append(lang)
    return sorted(codes), unknown


def audit_one(record: AppRecord, config: RunConfig, catalog: SensitivityCatalog, client,
              probe: ProbeConfig, throttle) -> AppAudit:
    apk_path = Path(config.apk_dir) / f"{record.app_id}.apk" if config.apk_dir else None
    if apk_path is None or not apk_path.is_file():
        behavioral = failed_profile(record.app_id, AnalysisStatus.LacksFiles, "no apk file")
    else:
        try:
            behavioral = analyze_apk(apk_path, catalog, store=record.store, app_id=record.app_id)
        except AnalysisError as exc:
            behavioral = failed_profile(record.app_id, AnalysisStatus.Unsupported, f"apk unreadable: {exc.code}: {exc}")

    policy_text, notes = None, []
    if config.policy_dir:
        for suffix in (".txt", ".html", ".htm"):
            candidate = Path(config.policy_dir) / f"{record.app_id}{suffix}"
            if candidate.is_file():
                policy_text = read_policy_file(candidate)
                break
    if policy_text is None:
        notes.append("no policy text file")

    link_status = coverage = None
    if client is not None and record.policy_url:
        try:
            link_status = check_link(record.policy_url, config.timeout_ms, client, throttle=throttle)
            codes, unknown = _language_codes(record.supported_languages)
            notes += [f"unrecognised language {u!r}" for u in sorted(unknown)]
            if codes:
                found = discover_language_variants(record.policy_url, codes, client, config=probe)
                coverage = {k: v.value for k, v in found.items()}
        except InvalidUrl as exc:
            notes.append(f"policy_url invalid: {exc}")
    declarative = declarative_profile(record, policy_text, catalog, link_status=link_status,
                                      language_coverage=coverage, notes=notes)
    return AppAudit(behavioral, declarative, tuple(run_checks(behavioral, declarative, DEFAULT_BENIGN_PERMISSIONS)))


def run_audit(config: RunConfig) -> dict:
    catalog = _load_catalog(config.catalog_path)
    if not config.records_path:
        raise ConfigError("--records is required")
    try:
        records = ingest_records(Path(config.records_path).read_bytes())
    except OSError as exc:
        raise ConfigError(f"cannot read records: {exc}") from None
    except AnalysisError as exc:
        raise ConfigError(f"records invalid: {exc.code}: {exc}") from None
    for d in (config.apk_dir, config.policy_dir):
        if d and not Path(d).is_dir():
            raise ConfigError(f"not a directory: {d}")

    client = _client(config.live_network, config.transcript_path)
    probe = ProbeConfig(timeout_ms=config.timeout_ms)
    throttle = HostThrottle(probe.host_delay_ms / 1000) if config.live_network else None
    records = sorted(records, key=lambda r: r.app_id)
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        audits = list(pool.map(lambda r: audit_one(r, config, catalog, client, probe, throttle), records))

    notes = []
    if client is None and any(r.policy_url for r in records):
        notes.append("link_status omitted: network probes disabled (run with --live)")
    return aggregate_report(audits, notes)


def render(report: dict, fmt: str) -> str:
    if fmt == "table":
        return render_table(report)
    if fmt == "csv":
        return render_csv(report)
    return dump_report(report)


def cmd_audit(args) -> int:
    config = RunConfig(
        catalog_path=args.catalog, records_path=args.records, apk_dir=args.apk_dir, policy_dir=args.policy_dir,
        output_path=args.output, format=args.format, live_network=args.live, timeout_ms=args.timeout_ms,
        workers=args.workers, transcript_path=args.transcript,
    )
    report = run_audit(config)
    if config.output_path:
        out = Path(config.output_path)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(dump_report(report), encoding="utf-8")
        if config.format != "json":
            ext = "txt" if config.format == "table" else "csv"
            (out / f"report.{ext}").write_text(render(report, config.format), encoding="utf-8")
    else:
        sys.stdout.write(render(report, config.format))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vrprivacy", description="Privacy audit of VR apps and their policies.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def catalog_flag(sp):
        sp.add_argument("--catalog", help=f"catalog JSON (default: ${ENV_VAR} or the shipped catalog)")

    a = sub.add_parser("analyze-apk", help="behavioral profile of one APK")
    a.add_argument("path")
    a.add_argument("--store", help="store the APK comes from (selects catalog rules)")
    catalog_flag(a)
    a.set_defaults(func=cmd_analyze_apk)

    a = sub.add_parser("analyze-policy", help="analyze one privacy-policy text or HTML file")
    a.add_argument("path")
    a.add_argument("--app-name")
    a.add_argument("--url", help="where the policy was published")
    catalog_flag(a)
    a.set_defaults(func=cmd_analyze_policy)

    a = sub.add_parser("check-links", help="probe policy URLs")
    a.add_argument("urls", nargs="*")
    a.add_argument("--urls-file")
    a.add_argument("--live", action="store_true", help="allow real network access")
    a.add_argument("--transcript", help="replay responses from a JSON transcript instead of the network")
    a.add_argument("--timeout-ms", type=int, default=DEFAULT_TIMEOUT_MS)
    a.add_argument("--concurrency", type=int, default=DEFAULT_CONCURRENCY)
    a.add_argument("--host-delay-ms", type=int, default=DEFAULT_HOST_DELAY_MS)
    a.add_argument("--format", choices=FORMATS, default="json")
    a.set_defaults(func=cmd_check_links)

    a = sub.add_parser("audit", help="full pipeline over a corpus")
    a.add_argument("--records", required=True, help="JSON array of store records")
    a.add_argument("--apk-dir", help="directory of <app_id>.apk")
    a.add_argument("--policy-dir", help="directory of <app_id>.txt / .html")
    a.add_argument("--output", help="directory for report.json (+ report.txt / report.csv)")
    a.add_argument("--format", choices=FORMATS, default="json")
    a.add_argument("--workers", type=int, default=1)
    a.add_argument("--live", action="store_true", help="probe policy links over the network")
    a.add_argument("--transcript", help="probe policy links against a JSON transcript")
    a.add_argument("--timeout-ms", type=int, default=DEFAULT_TIMEOUT_MS)
    catalog_flag(a)
    a.set_defaults(func=cmd_audit)

    a = sub.add_parser("catalog-validate", help="schema-check a catalog file")
    a.add_argument("path", nargs="?")
    a.set_defaults(func=cmd_catalog_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        _emit(_error(exc.code, str(exc)))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
