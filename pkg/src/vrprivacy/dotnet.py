"""Name extraction from .NET assemblies (Unity Mono builds).

Walks PE -> CLI header -> metadata root -> ``#~`` table stream far enough
to read the TypeRef, TypeDef, MethodDef and MemberRef tables, resolving
names through the ``#Strings`` heap.
"""

from __future__ import annotations

import struct

from .errors import CorruptMetadata, NoCliHeader, NotPe

CLI_DIRECTORY = 14
METADATA_MAGIC = 0x424A5342  # "BSJB"

# table ids
MODULE, TYPEREF, TYPEDEF, FIELDPTR, FIELD, METHODPTR, METHODDEF = 0x00, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06
PARAMPTR, PARAM, INTERFACEIMPL, MEMBERREF = 0x07, 0x08, 0x09, 0x0A
MODULEREF, TYPESPEC, ASSEMBLYREF = 0x1A, 0x1B, 0x23

# coded index families: (tag bits, member tables)
RESOLUTION_SCOPE = (2, (MODULE, MODULEREF, ASSEMBLYREF, TYPEREF))
TYPE_DEF_OR_REF = (2, (TYPEDEF, TYPEREF, TYPESPEC))
MEMBER_REF_PARENT = (3, (TYPEDEF, TYPEREF, MODULEREF, METHODDEF, TYPESPEC))


def _rva_to_offset(rva: int, sections: list[tuple[int, int, int, int]]) -> int:
    for vaddr, vsize, raw_ptr, raw_size in sections:
        if vaddr <= rva < vaddr + max(vsize, raw_size):
            return rva - vaddr + raw_ptr
    raise CorruptMetadata(f"RVA 0x{rva:x} is not inside any section")


def _locate_metadata(data: bytes) -> tuple[int, int]:
    if len(data) < 0x40 or data[:2] != b"MZ":
        raise NotPe("missing MZ header")
    (pe_off,) = struct.unpack_from("<I", data, 0x3C)
    if pe_off + 24 > len(data) or data[pe_off:pe_off + 4] != b"PE\0\0":
        raise NotPe("missing PE signature")
    (_machine, nsections, _ts, _sym, _nsym, opt_size, _chars) = struct.unpack_from("<HHIIIHH", data, pe_off + 4)
    opt = pe_off + 24
    if opt + 2 > len(data):
        raise NotPe("truncated optional header")
    (magic,) = struct.unpack_from("<H", data, opt)
    if magic == 0x10B:
        dir_count_at = opt + 92
    elif magic == 0x20B:
        dir_count_at = opt + 108
    else:
        raise NotPe(f"unknown optional header magic 0x{magic:x}")
    (ndirs,) = struct.unpack_from("<I", data, dir_count_at)
    if ndirs <= CLI_DIRECTORY:
        raise NoCliHeader("data directory table has no CLI entry")
    cli_rva, cli_size = struct.unpack_from("<II", data, dir_count_at + 4 + 8 * CLI_DIRECTORY)
    if cli_rva == 0 or cli_size == 0:
        raise NoCliHeader("CLI header directory is empty")

    sections = []
    sec = opt + opt_size
    for i in range(nsections):
        vsize, vaddr, raw_size, raw_ptr = struct.unpack_from("<IIII", data, sec + 40 * i + 8)
        sections.append((vaddr, vsize, raw_ptr, raw_size))
    cli = _rva_to_offset(cli_rva, sections)
    md_rva, md_size = struct.unpack_from("<II", data, cli + 8)
    md = _rva_to_offset(md_rva, sections)
    if md + md_size > len(data):
        raise CorruptMetadata("metadata runs past end of file")
    return md, md_size


def _streams(data: bytes, md: int) -> dict[str, tuple[int, int]]:
    (sig,) = struct.unpack_from("<I", data, md)
    if sig != METADATA_MAGIC:
        raise CorruptMetadata("metadata root lacks BSJB signature")
    (ver_len,) = struct.unpack_from("<I", data, md + 12)
    pos = md + 16 + ver_len
    _flags, count = struct.unpack_from("<HH", data, pos)
    pos += 4
    streams = {}
    for _ in range(count):
        offset, size = struct.unpack_from("<II", data, pos)
        pos += 8
        end = data.index(b"\0", pos)
        name = data[pos:end].decode("ascii", "replace")
        pos = (end + 4) & ~3
        streams[name] = (md + offset, size)
    return streams


class _Tables:
    def __init__(self, data: bytes, start: int, size: int):
        self.data = data
        heap_sizes = data[start + 6]
        (valid,) = struct.unpack_from("<Q", data, start + 8)
        pos = start + 24
        self.rows = [0] * 64
        for t in range(64):
            if valid >> t & 1:
                (self.rows[t],) = struct.unpack_from("<I", data, pos)
                pos += 4
        if heap_sizes & 0x40:
            pos += 4
        self.str_size = 4 if heap_sizes & 0x01 else 2
        self.guid_size = 4 if heap_sizes & 0x02 else 2
        self.blob_size = 4 if heap_sizes & 0x04 else 2

        self.layouts = self._layouts()
        self.offsets = {}
        for t in range(MEMBERREF + 1):
            self.offsets[t] = pos
            pos += self.rows[t] * sum(self.layouts[t])
        if pos > start + size:
            raise CorruptMetadata("table stream shorter than its row counts imply")

    def _idx(self, table: int) -> int:
        return 2 if self.rows[table] < 0x10000 else 4

    def _coded(self, family) -> int:
        bits, tables = family
        return 2 if max(self.rows[t] for t in tables) < (1 << (16 - bits)) else 4

    def _layouts(self) -> dict[int, tuple[int, ...]]:
        s, g, b = self.str_size, self.guid_size, self.blob_size
        return {
            MODULE: (2, s, g, g, g),
            TYPEREF: (self._coded(RESOLUTION_SCOPE), s, s),
            TYPEDEF: (4, s, s, self._coded(TYPE_DEF_OR_REF), self._idx(FIELD), self._idx(METHODDEF)),
            FIELDPTR: (self._idx(FIELD),),
            FIELD: (2, s, b),
            METHODPTR: (self._idx(METHODDEF),),
            METHODDEF: (4, 2, 2, s, b, self._idx(PARAM)),
            PARAMPTR: (self._idx(PARAM),),
            PARAM: (2, 2, s),
            INTERFACEIMPL: (self._idx(TYPEDEF), self._coded(TYPE_DEF_OR_REF)),
            MEMBERREF: (self._coded(MEMBER_REF_PARENT), s, b),
        }

    def row(self, table: int, i: int) -> list[int]:
        """Column values of 1-based row ``i``."""
        pos = self.offsets[table] + (i - 1) * sum(self.layouts[table])
        values = []
        for width in self.layouts[table]:
            values.append(int.from_bytes(self.data[pos:pos + width], "little"))
            pos += width
        return values


def parse_dotnet_names(data: bytes) -> set[str]:
    md, _md_size = _locate_metadata(data)
    try:
        streams = _streams(data, md)
        tables_stream = streams.get("#~") or streams.get("#-")
        strings_stream = streams.get("#Strings")
        if tables_stream is None or strings_stream is None:
            raise CorruptMetadata("missing #~ or #Strings stream")
        tables = _Tables(data, *tables_stream)
    except (struct.error, ValueError, IndexError) as exc:
        raise CorruptMetadata(f"unreadable metadata: {exc}") from None

    str_start, str_size = strings_stream

    def string(index: int) -> str:
        if index >= str_size:
            raise CorruptMetadata(f"#Strings index {index} out of range ({str_size})")
        pos = str_start + index
        end = data.find(b"\0", pos, str_start + str_size)
        if end < 0:
            raise CorruptMetadata(f"#Strings entry at {index} is unterminated")
        return data[pos:end].decode("utf-8", "replace")

    def qualify(ns: str, name: str) -> str:
        return f"{ns}.{name}" if ns else name

    names: set[str] = set()
    typeref_names = {}
    for i in range(1, tables.rows[TYPEREF] + 1):
        _scope, name, ns = tables.row(TYPEREF, i)
        typeref_names[i] = qualify(string(ns), string(name))
        names.add(typeref_names[i])

    typedef_names = {}
    method_owner = {}
    n_methods = tables.rows[METHODDEF]
    typedef_rows = [tables.row(TYPEDEF, i) for i in range(1, tables.rows[TYPEDEF] + 1)]
    for i, (_flags, name, ns, _extends, _fields, method_list) in enumerate(typedef_rows, 1):
        typedef_names[i] = qualify(string(ns), string(name))
        names.add(typedef_names[i])
        end = typedef_rows[i][5] if i < len(typedef_rows) else n_methods + 1
        for m in range(method_list, min(end, n_methods + 1)):
            method_owner[m] = typedef_names[i]

    for m in range(1, n_methods + 1):
        name = string(tables.row(METHODDEF, m)[3])
        owner = method_owner.get(m)
        names.add(f"{owner}::{name}" if owner else name)

    tag_bits, parents = MEMBER_REF_PARENT
    for i in range(1, tables.rows[MEMBERREF] + 1):
        parent, name, _sig = tables.row(MEMBERREF, i)
        tag = parent & ((1 << tag_bits) - 1)
        if tag >= len(parents):
            raise CorruptMetadata(f"MemberRef {i}: bad parent tag {tag}")
        table, row = parents[tag], parent >> tag_bits
        member = string(name)
        if table == TYPEREF and row in typeref_names:
            names.add(f"{typeref_names[row]}::{member}")
        elif table == TYPEDEF and row in typedef_names:
            names.add(f"{typedef_names[row]}::{member}")
        else:
            names.add(member)
    return names
