"""global-metadata.dat decoding.

Structured mode understands one pinned, offset-annotated layout (what a
dumper produces after joining the metadata with the code registration):

    header (little-endian, 32 bytes)
      u32 sanity      0xFAB11BAF
      i32 version     24..29
      u32 string_offset, string_size     NUL-terminated identifier pool
      u32 methods_offset, methods_size   16-byte method records
      u32 types_offset, types_size       8-byte type records

    method record: u32 name_index, i32 declaring_type, u32 code_offset, u32 token
    type record:   u32 name_index, u32 namespace_index

``name_index`` values are byte offsets into the string pool.  Any other
version falls back to a printable-identifier scan over the whole file.
"""

from __future__ import annotations

import enum
import re
import struct
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .errors import EmptyInput, TruncatedHeader

METADATA_MAGIC = 0xFAB11BAF
SUPPORTED_VERSIONS = range(24, 30)
HEADER = struct.Struct("<IiIIIIII")
METHOD_RECORD = struct.Struct("<IiII")
TYPE_RECORD = struct.Struct("<II")

IDENT_RUN = re.compile(rb"[A-Za-z0-9_.]{4,}")


class ParseMode(str, enum.Enum):
    STRUCTURED = "Structured"
    STRING_SCAN = "StringScan"


@dataclass(frozen=True)
class MetadataTable:
    method_names: tuple[str, ...]
    name_to_offset: Mapping[str, int]
    raw_strings: frozenset[str]
    parse_mode: ParseMode
    version: int | None = field(default=None, compare=False)


def scan_identifiers(data: bytes) -> frozenset[str]:
    return frozenset(m.group().decode("ascii") for m in IDENT_RUN.finditer(data))


def _cstring(pool: bytes, index: int) -> str:
    if index >= len(pool):
        raise TruncatedHeader(f"string index {index} outside string pool")
    end = pool.find(b"\0", index)
    if end < 0:
        end = len(pool)
    return pool[index:end].decode("utf-8", "replace")


def _section(data: bytes, offset: int, size: int, what: str) -> bytes:
    if offset + size > len(data):
        raise TruncatedHeader(f"{what} section [{offset}, {offset + size}) runs past "
                              f"{len(data)} bytes")
    return data[offset:offset + size]


def parse_global_metadata(data: bytes) -> MetadataTable:
    if not data:
        raise EmptyInput("empty metadata")
    magic_ok = len(data) >= 4 and struct.unpack_from("<I", data)[0] == METADATA_MAGIC
    if magic_ok and len(data) < HEADER.size:
        raise TruncatedHeader(f"header needs {HEADER.size} bytes, got {len(data)}")
    if magic_ok:
        (_, version, s_off, s_size, m_off, m_size, t_off, t_size) = HEADER.unpack_from(data)
        if version in SUPPORTED_VERSIONS:
            return _parse_structured(data, version, s_off, s_size, m_off, m_size, t_off, t_size)
    return MetadataTable((), MappingProxyType({}), scan_identifiers(data), ParseMode.STRING_SCAN)


def _parse_structured(data, version, s_off, s_size, m_off, m_size, t_off, t_size) -> MetadataTable:
    pool = _section(data, s_off, s_size, "string")
    methods = _section(data, m_off, m_size, "method")
    types = _section(data, t_off, t_size, "type")

    type_names = []
    for name_idx, ns_idx in TYPE_RECORD.iter_unpack(types[:len(types) - len(types) % TYPE_RECORD.size]):
        name, ns = _cstring(pool, name_idx), _cstring(pool, ns_idx)
        type_names.append(f"{ns}.{name}" if ns else name)

    names: list[str] = []
    offsets: dict[str, int] = {}
    usable = methods[:len(methods) - len(methods) % METHOD_RECORD.size]
    for name_idx, declaring, code_offset, _token in METHOD_RECORD.iter_unpack(usable):
        name = _cstring(pool, name_idx)
        if 0 <= declaring < len(type_names):
            name = f"{type_names[declaring]}::{name}"
        names.append(name)
        offsets.setdefault(name, code_offset)

    raw = {s.decode("utf-8", "replace") for s in pool.split(b"\0") if s}
    raw.update(names)
    return MetadataTable(tuple(names), MappingProxyType(offsets), frozenset(raw),
                         ParseMode.STRUCTURED, version)
