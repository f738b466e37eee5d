"""Tiny .NET assembly emitter: a PE32 DLL whose only content is metadata.

Produces the TypeRef/TypeDef/MethodDef/MemberRef tables that Unity Mono
builds ship in ``Assembly-CSharp.dll``; no IL bodies.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

TEXT_RVA = 0x2000
FILE_ALIGN = 0x200
CLI_HEADER_SIZE = 72


@dataclass
class AssemblySpec:
    # (namespace, name)
    typerefs: list[tuple[str, str]] = field(default_factory=list)
    # (namespace, name, [method names])
    typedefs: list[tuple[str, str, list[str]]] = field(default_factory=lambda: [("", "<Module>", [])])
    # (parent kind "typeref" | "typedef", 0-based parent index, member name)
    memberrefs: list[tuple[str, int, str]] = field(default_factory=list)

    def expected_names(self) -> set[str]:
        def q(ns, name):
            return f"{ns}.{name}" if ns else name

        names = {q(ns, n) for ns, n in self.typerefs}
        for ns, n, methods in self.typedefs:
            names.add(q(ns, n))
            names.update(f"{q(ns, n)}::{m}" for m in methods)
        for kind, idx, member in self.memberrefs:
            ns, n = (self.typerefs[idx] if kind == "typeref" else self.typedefs[idx][:2])
            names.add(f"{q(ns, n)}::{member}")
        return names


class _Heap:
    def __init__(self, initial: bytes):
        self.data = bytearray(initial)
        self.index: dict[bytes, int] = {}

    def add(self, raw: bytes) -> int:
        if raw not in self.index:
            self.index[raw] = len(self.data)
            self.data += raw
        return self.index[raw]


def _pad4(b: bytes) -> bytes:
    return b + b"\0" * (-len(b) % 4)


def _metadata(spec: AssemblySpec) -> bytes:
    strings = _Heap(b"\0")

    def s(text: str) -> int:
        return strings.add(text.encode("utf-8") + b"\0") if text else 0

    blob = _Heap(b"\0")
    method_sig = blob.add(b"\x03\x20\x00\x01")  # HASTHIS, 0 params, void
    guid = bytes(range(16))

    tables: dict[int, list[bytes]] = {0x00: [struct.pack("<HHHHH", 0, s("Assembly-CSharp.dll"), 1, 0, 0)]}
    tables[0x01] = [struct.pack("<HHH", (1 << 2) | 2, s(n), s(ns)) for ns, n in spec.typerefs]

    typedef_rows, method_rows, next_method = [], [], 1
    for ns, n, methods in spec.typedefs:
        typedef_rows.append(struct.pack("<IHHHHH", 0, s(n), s(ns), 0, 1, next_method))
        for m in methods:
            method_rows.append(struct.pack("<IHHHHH", 0, 0, 0x0086, s(m), method_sig, 1))
            next_method += 1
    tables[0x02] = typedef_rows
    tables[0x06] = method_rows
    tables[0x0A] = [
        struct.pack("<HHH", ((idx + 1) << 3) | (1 if kind == "typeref" else 0), s(member), method_sig)
        for kind, idx, member in spec.memberrefs
    ]
    tables[0x23] = [struct.pack("<HHHHIHHHH", 0, 0, 0, 0, 0, 0, s("UnityEngine"), 0, 0)]

    present = sorted(t for t, rows in tables.items() if rows or t == 0x00)
    valid = sum(1 << t for t in present)
    stream = bytearray(struct.pack("<IBBBBQQ", 0, 2, 0, 0, 1, valid, 0))
    for t in present:
        stream += struct.pack("<I", len(tables[t]))
    for t in present:
        stream += b"".join(tables[t])

    streams = [
        ("#~", _pad4(bytes(stream))),
        ("#Strings", _pad4(bytes(strings.data))),
        ("#US", _pad4(b"\0")),
        ("#GUID", guid),
        ("#Blob", _pad4(bytes(blob.data))),
    ]
    version = _pad4(b"v4.0.30319\0")
    header_len = 16 + len(version) + 4 + sum(8 + len(_pad4(n.encode() + b"\0")) for n, _ in streams)
    root = bytearray(struct.pack("<IHHII", 0x424A5342, 1, 1, 0, len(version)) + version)
    root += struct.pack("<HH", 0, len(streams))
    offset = header_len
    for name, body in streams:
        root += struct.pack("<II", offset, len(body)) + _pad4(name.encode() + b"\0")
        offset += len(body)
    for _, body in streams:
        root += body
    return bytes(root)


def build_assembly(spec: AssemblySpec | None = None, *, with_cli: bool = True) -> bytes:
    spec = spec or AssemblySpec()
    metadata = _metadata(spec) if with_cli else b""
    md_rva = TEXT_RVA + CLI_HEADER_SIZE
    cli = struct.pack("<IHHIIII", CLI_HEADER_SIZE, 2, 5, md_rva, len(metadata), 1, 0) + b"\0" * 48
    section = (cli + metadata) if with_cli else b"\xc3" * 16
    raw_size = len(section) + (-len(section) % FILE_ALIGN)

    dos = bytearray(b"MZ" + b"\0" * 0x3A + struct.pack("<I", 0x80))
    dos += b"\0" * (0x80 - len(dos))
    coff = b"PE\0\0" + struct.pack("<HHIIIHH", 0x14C, 1, 0, 0, 0, 0xE0, 0x2102)
    size_of_image = TEXT_RVA + ((len(section) + 0x1FFF) & ~0x1FFF)
    opt = struct.pack(
        "<HBBIIIIIIIIIHHHHHHIIIIHHIIIIII",
        0x10B, 8, 0, raw_size, 0, 0, 0, TEXT_RVA, 0x4000, 0x10000000, 0x2000, FILE_ALIGN,
        4, 0, 0, 0, 4, 0, 0, size_of_image, FILE_ALIGN, 0, 3, 0x8540,
        0x100000, 0x1000, 0x100000, 0x1000, 0, 16,
    )
    dirs = [(0, 0)] * 16
    if with_cli:
        dirs[14] = (TEXT_RVA, CLI_HEADER_SIZE)
    opt += b"".join(struct.pack("<II", *d) for d in dirs)
    sec_header = struct.pack("<8sIIIIIIHHI", b".text", len(section), TEXT_RVA, raw_size, FILE_ALIGN,
                             0, 0, 0, 0, 0x60000020)
    headers = bytes(dos) + coff + opt + sec_header
    headers += b"\0" * (FILE_ALIGN - len(headers))
    return headers + section + b"\0" * (raw_size - len(section))
