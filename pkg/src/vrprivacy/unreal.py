"""Unreal builds: OBB bundle -> .pak index -> DefaultEngine.ini / *.uplugin.

Supported pak family: versions 1-4, uncompressed and unencrypted entries,
trailing 44-byte footer (45 for v4, whose extra leading byte flags an
encrypted index).
"""

from __future__ import annotations

import json
import logging
import posixpath
import struct
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from .catalog import ApiRule
from .errors import (
    BadFooterMagic,
    CompressedEntryUnsupported,
    EncryptedIndexUnsupported,
    IndexOutOfBounds,
    MalformedIni,
    MalformedPluginJson,
    MultiplePakEntries,
    NoPakEntry,
    UnsupportedPakVersion,
)
from .evidence import AccessEvidence
from .ziparchive import open_zip_bytes

log = logging.getLogger(__name__)

PAK_MAGIC = 0x5A6F12E1
FOOTER = struct.Struct("<IIQQ20s")
SUPPORTED_PAK_VERSIONS = (1, 2, 3, 4)
COMPRESS_NONE = 0

TRUE_VALUES = ("True", "true", "1")
FALSE_VALUES = ("False", "false", "0")


@dataclass(frozen=True)
class PakEntry:
    offset: int
    size: int
    compression_flag: int
    data_offset: int
    encrypted: bool = False


@dataclass(frozen=True)
class PakIndex:
    mount_point: str
    entries: Mapping[str, PakEntry]
    version: int


@dataclass(frozen=True)
class EngineConfig:
    sections: Mapping[str, Mapping[str, str]]

    def __eq__(self, other):
        if not isinstance(other, EngineConfig):
            return NotImplemented
        return {k: dict(v) for k, v in self.sections.items()} == \
            {k: dict(v) for k, v in other.sections.items()}

    def dumps(self) -> str:
        lines = []
        for name, pairs in self.sections.items():
            if name:
                lines.append(f"[{name}]")
            lines.extend(f"{k}={v}" for k, v in pairs.items())
            lines.append("")
        return "\n".join(lines)


@dataclass(frozen=True)
class PluginManifest:
    plugin_name: str
    modules: tuple[str, ...] = field(default=())


def unwrap_obb(data: bytes) -> bytes:
    """Return the single .pak carried by a ``main.obb.png`` style zip."""
    archive = open_zip_bytes(data, "<obb>")
    paks = sorted(p for p in archive.members if p.lower().endswith(".pak"))
    if not paks:
        raise NoPakEntry("obb bundle holds no .pak entry")
    if len(paks) > 1:
        raise MultiplePakEntries(f"obb bundle holds {len(paks)} .pak entries: {paks}")
    return archive.read(paks[0])


class _Reader:
    def __init__(self, data: bytes, pos: int, end: int):
        self.data, self.pos, self.end = data, pos, end

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > self.end:
            raise IndexOutOfBounds("pak index truncated")
        values = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return values

    def fstring(self) -> str:
        (n,) = self.take("<i")
        if n == 0:
            return ""
        if n < 0:
            raw = self.take(f"<{-n * 2}s")[0]
            return raw.decode("utf-16-le").rstrip("\0")
        raw = self.take(f"<{n}s")[0]
        return raw.decode("utf-8", "replace").rstrip("\0")


def _record_size(version: int, method: int, block_count: int) -> int:
    if version == 1:
        return 56
    if version == 2:
        return 48
    size = 48 + 5
    if method != COMPRESS_NONE:
        size += 4 + 16 * block_count
    return size


def _read_record(r: _Reader, version: int):
    if version == 1:
        offset, csize, usize, method, _ts, _sha = r.take("<QQQIQ20s")
        return offset, csize, usize, method, 0, False
    offset, csize, usize, method, _sha = r.take("<QQQI20s")
    blocks, encrypted = 0, False
    if version >= 3:
        if method != COMPRESS_NONE:
            (blocks,) = r.take("<I")
            r.take(f"<{16 * blocks}s")
        enc, _block_size = r.take("<BI")
        encrypted = bool(enc)
    return offset, csize, usize, method, blocks, encrypted


def parse_pak_index(data: bytes) -> PakIndex:
    if len(data) < FOOTER.size:
        raise BadFooterMagic("data shorter than a pak footer")
    footer_offset = len(data) - FOOTER.size
    magic, version, index_offset, index_size, _sha = FOOTER.unpack_from(data, footer_offset)
    if magic != PAK_MAGIC:
        raise BadFooterMagic(f"footer magic 0x{magic:08x}")
    if version not in SUPPORTED_PAK_VERSIONS:
        raise UnsupportedPakVersion(f"pak version {version}")
    if version >= 4:
        footer_offset -= 1
        if footer_offset < 0:
            raise IndexOutOfBounds("no room for index-encryption flag")
        if data[footer_offset]:
            raise EncryptedIndexUnsupported("pak index is encrypted")
    if index_offset + index_size > footer_offset:
        raise IndexOutOfBounds("index region overlaps footer or end of data")

    r = _Reader(data, index_offset, index_offset + index_size)
    mount_point = r.fstring()
    (count,) = r.take("<I")
    entries: dict[str, PakEntry] = {}
    for _ in range(count):
        path = r.fstring()
        offset, csize, _usize, method, blocks, encrypted = _read_record(r, version)
        data_offset = offset + _record_size(version, method, blocks)
        if data_offset + csize > index_offset:
            raise IndexOutOfBounds(f"{path}: entry data [{offset}, {data_offset + csize}) "
                                   f"runs past the data region")
        if path in entries:
            log.warning("duplicate pak path %s ignored", path)
            continue
        entries[path] = PakEntry(offset, csize, method, data_offset, encrypted)
    return PakIndex(mount_point, MappingProxyType(entries), version)


def read_pak_entry(pak: bytes, index: PakIndex, path: str) -> bytes:
    entry = index.entries[path]
    if entry.compression_flag != COMPRESS_NONE:
        raise CompressedEntryUnsupported(f"{path}: compression method {entry.compression_flag}")
    if entry.encrypted:
        raise CompressedEntryUnsupported(f"{path}: entry is encrypted")
    return pak[entry.data_offset:entry.data_offset + entry.size]


def parse_ini(text: str) -> EngineConfig:
    sections: dict[str, dict[str, str]] = {}
    current = ""
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line[0] in ";#":
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise MalformedIni(f"line {lineno}: unterminated section header")
            current = line[1:-1].strip()
            sections.setdefault(current, {})
            continue
        key, sep, value = line.partition("=")
        if not sep:
            log.debug("ini line %d has no '=': %r", lineno, line)
            continue
        sections.setdefault(current, {})[key.strip()] = value.strip()
    return EngineConfig(MappingProxyType({k: MappingProxyType(v) for k, v in sections.items()}))


def parse_uplugin(text: str, plugin_name: str) -> PluginManifest:
    try:
        doc = json.loads(text.lstrip("\ufeff"))
    except json.JSONDecodeError as exc:
        raise MalformedPluginJson(f"{plugin_name}: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedPluginJson(f"{plugin_name}: root is not an object")
    modules = doc.get("Modules", [])
    if not isinstance(modules, list):
        raise MalformedPluginJson(f"{plugin_name}: 'Modules' is not a list")
    names = []
    for m in modules:
        if not isinstance(m, dict):
            raise MalformedPluginJson(f"{plugin_name}: module entry is not an object")
        name = m.get("Name")
        if isinstance(name, str) and name.strip():
            names.append(name.strip())
    return PluginManifest(plugin_name, tuple(names))


def read_config_and_plugins(pak: bytes, index: PakIndex) -> tuple[EngineConfig | None, list[PluginManifest]]:
    merged: dict[str, dict[str, str]] = {}
    found_ini = False
    plugins = []
    for path in sorted(index.entries):
        lower = path.lower()
        if lower.endswith("defaultengine.ini") and posixpath.basename(lower) == "defaultengine.ini":
            raw = read_pak_entry(pak, index, path)
            cfg = parse_ini(raw.decode("utf-8-sig", "replace"))
            found_ini = True
            for name, pairs in cfg.sections.items():
                merged.setdefault(name, {}).update(pairs)
        elif lower.endswith(".uplugin"):
            raw = read_pak_entry(pak, index, path)
            stem = posixpath.splitext(posixpath.basename(path))[0]
            plugins.append(parse_uplugin(raw.decode("utf-8", "replace"), stem))
    config = None
    if found_ini:
        config = EngineConfig(MappingProxyType({k: MappingProxyType(v) for k, v in merged.items()}))
    return config, plugins


def _bare_key(key: str) -> str:
    # UE array operators: +Key, -Key, .Key, !Key
    return key.lstrip("+-.!").strip().lower()


def detect_sensitive_config(cfg: EngineConfig | None, plugins: Iterable[PluginManifest],
                            rules: Iterable[ApiRule]) -> list[AccessEvidence]:
    rules = list(rules)
    key_rules: dict[str, list[ApiRule]] = {}
    module_rules: dict[str, list[ApiRule]] = {}
    for rule in rules:
        if rule.kind == "config_key":
            key_rules.setdefault(rule.name.lower(), []).append(rule)
        elif rule.kind == "module":
            module_rules.setdefault(rule.name, []).append(rule)

    evidence: list[AccessEvidence] = []
    if cfg is not None:
        for section, pairs in cfg.sections.items():
            for key, value in pairs.items():
                matched = key_rules.get(_bare_key(key))
                if not matched:
                    continue
                if value not in TRUE_VALUES:
                    if value not in FALSE_VALUES:
                        log.info("[%s] %s=%r is not a recognised boolean; treated as false",
                                 section, key, value)
                    continue
                for rule in matched:
                    evidence.append(AccessEvidence(rule.data_type, rule.name, (key,),
                                                   detail=f"[{section}] {key}={value}"))
    for plugin in plugins:
        for module in plugin.modules:
            for rule in module_rules.get(module, ()):
                evidence.append(AccessEvidence(rule.data_type, rule.name, (module,),
                                               detail=f"plugin {plugin.plugin_name}"))
    return evidence
