"""Store x engine x data-type mapping of sensitive APIs, plus the policy corpus.

The catalog is data (``data/catalog.json`` by default) so new stores or SDK
names need no code change.  Schema::

    {
      "api_rules": [
        {"store": "Pico" | ... | "any", "engine": "Unity" | "Unreal",
         "data_type": "Body" | "Face" | "Eye" | "Hand",
         "kind": "api" | "class" | "module" | "config_key",
         "name": "...", "kind_source": "text" | "convention"  (optional)}
      ],
      "policy_corpus": {"Body": ["Body Tracking", ...], ...}
    }
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from importlib import resources
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import DuplicateRule, SchemaViolation, UnknownDataType
from .evidence import DATA_TYPES

RULE_KINDS = ("api", "class", "module", "config_key")
ENGINES = ("Unity", "Unreal")
ANY_STORE = "any"
ENV_VAR = "AUDITOR_CATALOG"


@dataclass(frozen=True)
class ApiRule:
    store: str
    engine: str
    data_type: str
    kind: str
    name: str
    kind_source: str = "convention"

    def to_dict(self) -> dict:
        return {
            "store": self.store,
            "engine": self.engine,
            "data_type": self.data_type,
            "kind": self.kind,
            "name": self.name,
            "kind_source": self.kind_source,
        }


@dataclass(frozen=True)
class SensitivityCatalog:
    api_rules: tuple[ApiRule, ...]
    policy_corpus: Mapping[str, tuple[str, ...]]

    def __eq__(self, other):
        if not isinstance(other, SensitivityCatalog):
            return NotImplemented
        return (set(self.api_rules) == set(other.api_rules)
                and {k: frozenset(v) for k, v in self.policy_corpus.items()}
                == {k: frozenset(v) for k, v in other.policy_corpus.items()})

    def __hash__(self):
        return hash(frozenset(self.api_rules))

    @property
    def data_types(self) -> frozenset[str]:
        return frozenset(self.policy_corpus)


def normalize_phrase(text: str) -> str:
    """Lower-case, fold hyphens and whitespace runs to single spaces."""
    return re.sub(r"[\s\-]+", " ", text.strip().lower())


def _require(obj: dict, key: str, where: str, kind=str):
    if key not in obj:
        raise SchemaViolation(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise SchemaViolation(f"{where}.{key}: expected {kind.__name__}")
    return value


def load_catalog(text: bytes | str) -> SensitivityCatalog:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"catalog is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaViolation("catalog root must be an object")
    raw_rules = _require(doc, "api_rules", "$", list)
    raw_corpus = _require(doc, "policy_corpus", "$", dict)

    rules: list[ApiRule] = []
    seen: set[tuple] = set()
    for i, raw in enumerate(raw_rules):
        where = f"$.api_rules[{i}]"
        if not isinstance(raw, dict):
            raise SchemaViolation(f"{where}: expected object")
        store = _require(raw, "store", where)
        engine = _require(raw, "engine", where)
        data_type = _require(raw, "data_type", where)
        kind = _require(raw, "kind", where)
        name = _require(raw, "name", where)
        if data_type not in DATA_TYPES:
            raise UnknownDataType(f"{where}.data_type: {data_type!r}")
        if kind not in RULE_KINDS:
            raise SchemaViolation(f"{where}.kind: {kind!r} not one of {RULE_KINDS}")
        if engine not in ENGINES:
            raise SchemaViolation(f"{where}.engine: {engine!r} not one of {ENGINES}")
        if not name.strip() or not store.strip():
            raise SchemaViolation(f"{where}: empty store or name")
        # a module may legitimately feed two data types (PICOXRHMD: Eye and Hand)
        key = (store, engine, data_type, kind, name)
        if key in seen:
            raise DuplicateRule(f"{where}: duplicate rule {key}")
        seen.add(key)
        rules.append(ApiRule(store, engine, data_type, kind, name,
                             raw.get("kind_source", "convention")))

    corpus: dict[str, tuple[str, ...]] = {}
    for data_type, phrases in raw_corpus.items():
        if data_type not in DATA_TYPES:
            raise UnknownDataType(f"$.policy_corpus: {data_type!r}")
        if not isinstance(phrases, list) or not all(isinstance(p, str) and p.strip() for p in phrases):
            raise SchemaViolation(f"$.policy_corpus.{data_type}: expected list of non-empty strings")
        corpus[data_type] = tuple(phrases)
    for data_type in DATA_TYPES:
        if not corpus.get(data_type):
            raise SchemaViolation(f"$.policy_corpus: no phrases for {data_type}")
    return SensitivityCatalog(tuple(rules), MappingProxyType(corpus))


def dump_catalog(catalog: SensitivityCatalog) -> str:
    doc = {
        "schema": "catalog_v1",
        "api_rules": [r.to_dict() for r in catalog.api_rules],
        "policy_corpus": {k: list(v) for k, v in catalog.policy_corpus.items()},
    }
    return json.dumps(doc, indent=2)


def default_catalog_text() -> bytes:
    return resources.files("vrprivacy.data").joinpath("catalog.json").read_bytes()


def load_default_catalog() -> SensitivityCatalog:
    return load_catalog(default_catalog_text())


def load_catalog_path(path: str | os.PathLike | None = None) -> SensitivityCatalog:
    """Load from ``path``, else ``$AUDITOR_CATALOG``, else the shipped file."""
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return load_default_catalog()
    with open(path, "rb") as fh:
        return load_catalog(fh.read())


def lookup(catalog: SensitivityCatalog, store: str, engine) -> list[ApiRule]:
    engine = getattr(engine, "family", engine)
    return [r for r in catalog.api_rules
            if r.engine == engine and r.store in (store, ANY_STORE)]


def rules_by_kind(rules: Iterable[ApiRule], *kinds: str) -> list[ApiRule]:
    return [r for r in rules if r.kind in kinds]
