"""ELF64/AArch64 image and global-metadata.dat writers."""

from __future__ import annotations

import struct

from ..il2cpp import HEADER, METADATA_MAGIC, METHOD_RECORD, TYPE_RECORD

NOP = 0xD503201F
RET = 0xD65F03C0


def encode_bl(pc: int, target: int) -> int:
    delta = target - pc
    if delta % 4 or not -(1 << 27) <= delta < (1 << 27):
        raise ValueError(f"BL from 0x{pc:x} cannot reach 0x{target:x}")
    return 0x94000000 | ((delta >> 2) & 0x03FFFFFF)


def build_elf(text: bytes, text_addr: int, *, machine: int = 183, elf_class: int = 2,
              data_encoding: int = 1, text_name: bytes = b".text") -> bytes:
    shstrtab = b"\0" + text_name + b"\0.shstrtab\0"
    text_off = 0x40
    shstr_off = text_off + len(text)
    shoff = (shstr_off + len(shstrtab) + 7) & ~7
    ident = b"\x7fELF" + bytes([elf_class, data_encoding, 1, 0]) + b"\0" * 8
    header = ident + struct.pack("<HHIQQQIHHHHHH", 3, machine, 1, 0, 0, shoff, 0, 64, 0, 0, 64, 3, 2)
    sections = [
        struct.pack("<IIQQQQIIQQ", 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
        struct.pack("<IIQQQQIIQQ", 1, 1, 0x6, text_addr, text_off, len(text), 0, 0, 4, 0),
        struct.pack("<IIQQQQIIQQ", 2 + len(text_name), 3, 0, 0, shstr_off, len(shstrtab), 0, 0, 1, 0),
    ]
    body = header + text + shstrtab
    body += b"\0" * (shoff - len(body))
    return body + b"".join(sections)


def text_with_calls(base: int, size: int, calls: dict[int, int]) -> bytes:
    """A NOP-filled .text of ``size`` bytes with a BL at each ``addr -> target``."""
    words = bytearray(struct.pack("<I", NOP) * (size // 4))
    for addr, target in calls.items():
        struct.pack_into("<I", words, addr - base, encode_bl(addr, target))
    return bytes(words)


def build_metadata(methods: list[tuple[str, int]], *, types: list[tuple[str, str]] = (),
                   method_types: list[int] | None = None, version: int = 24,
                   magic: int = METADATA_MAGIC) -> bytes:
    """Pinned-layout global-metadata.dat.

    ``methods`` is ``[(name, code_offset)]``; ``method_types`` optionally gives
    each method's declaring type index into ``types`` (``-1`` for none).
    """
    pool = bytearray(b"\0")
    index: dict[str, int] = {}

    def intern(s: str) -> int:
        if s not in index:
            index[s] = len(pool)
            pool.extend(s.encode("utf-8") + b"\0")
        return index[s]

    type_blob = b"".join(TYPE_RECORD.pack(intern(n), intern(ns) if ns else 0) for ns, n in types)
    method_types = method_types or [-1] * len(methods)
    method_blob = b"".join(
        METHOD_RECORD.pack(intern(name), decl, offset, 0x06000001 + i)
        for i, ((name, offset), decl) in enumerate(zip(methods, method_types))
    )
    s_off = HEADER.size
    m_off = s_off + len(pool)
    t_off = m_off + len(method_blob)
    header = HEADER.pack(magic, version, s_off, len(pool), m_off, len(method_blob), t_off, len(type_blob))
    return header + bytes(pool) + method_blob + type_blob
