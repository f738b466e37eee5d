"""Reference .pak writer for uncompressed entries."""

from __future__ import annotations

import hashlib
import struct

from ..unreal import PAK_MAGIC


def _fstring(s: str) -> bytes:
    if s.isascii():
        raw = s.encode("ascii") + b"\0"
        return struct.pack("<i", len(raw)) + raw
    raw = s.encode("utf-16-le") + b"\0\0"
    return struct.pack("<i", -(len(raw) // 2)) + raw


def _record(version: int, offset: int, data: bytes, encrypted: bool = False) -> bytes:
    sha = hashlib.sha1(data).digest()
    if version == 1:
        return struct.pack("<QQQIQ20s", offset, len(data), len(data), 0, 0, sha)
    rec = struct.pack("<QQQI20s", offset, len(data), len(data), 0, sha)
    if version >= 3:
        rec += struct.pack("<BI", int(encrypted), 0)
    return rec


def write_pak(files: dict[str, bytes], *, mount_point: str = "../../../", version: int = 3,
              encrypted_index: bool = False, magic: int = PAK_MAGIC) -> bytes:
    out = bytearray()
    index_records = []
    for path in files:
        data = files[path]
        offset = len(out)
        # inline header carries offset 0, as UnrealPak writes it
        out += _record(version, 0, data)
        out += data
        index_records.append(_fstring(path) + _record(version, offset, data))
    index = _fstring(mount_point) + struct.pack("<I", len(files)) + b"".join(index_records)
    index_offset = len(out)
    out += index
    if version >= 4:
        out += bytes([1 if encrypted_index else 0])
    out += struct.pack("<IIQQ20s", magic, version, index_offset, len(index),
                       hashlib.sha1(index).digest())
    return bytes(out)


def pak_listing(files: dict[str, bytes], version: int = 3) -> dict[str, tuple[int, int]]:
    """Expected (offset, size) per path for :func:`write_pak` output."""
    header = {1: 56, 2: 48}.get(version, 53)
    pos, listing = 0, {}
    for path, data in files.items():
        listing[path] = (pos, len(data))
        pos += header + len(data)
    return listing
