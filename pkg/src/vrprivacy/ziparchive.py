"""Minimal zip central-directory reader.

Only what APKs and OBB bundles need: stored and deflate members, optional
zip64 records, lazy member extraction from either a file path or an
in-memory buffer.
"""

from __future__ import annotations

import logging
import os
import struct
import zlib
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .errors import (
    CorruptEntry,
    EntryNotFound,
    NotAZip,
    TruncatedArchive,
    UnsupportedCompression,
)

log = logging.getLogger(__name__)

EOCD_SIG = b"PK\x05\x06"
CDIR_SIG = b"PK\x01\x02"
LOCAL_SIG = b"PK\x03\x04"
ZIP64_LOCATOR_SIG = b"PK\x06\x07"
ZIP64_EOCD_SIG = b"PK\x06\x06"

EOCD_LEN = 22
CDIR_LEN = 46
LOCAL_LEN = 30
MAX_COMMENT = 0xFFFF

STORED = 0
DEFLATED = 8


@dataclass(frozen=True)
class ZipMember:
    path: str
    method: int
    flags: int
    crc: int
    compressed_size: int
    size: int
    local_offset: int


@dataclass(frozen=True)
class ZipArchive:
    """Central-directory listing of a zip archive.

    ``entries`` maps archive path to uncompressed byte length. Member data is
    only read by :meth:`read`.
    """

    source: str
    members: Mapping[str, ZipMember]
    _buffer: bytes | None = field(default=None, repr=False, compare=False)

    @property
    def entries(self) -> Mapping[str, int]:
        return MappingProxyType({p: m.size for p, m in self.members.items()})

    def __contains__(self, path: str) -> bool:
        return path in self.members

    def _read_at(self, offset: int, size: int) -> bytes:
        if self._buffer is not None:
            return self._buffer[offset:offset + size]
        with open(self.source, "rb") as fh:
            fh.seek(offset)
            return fh.read(size)

    def read(self, path: str) -> bytes:
        try:
            member = self.members[path]
        except KeyError:
            raise EntryNotFound(path) from None
        if member.flags & 0x1:
            raise UnsupportedCompression(f"{path}: encrypted member")
        if member.method not in (STORED, DEFLATED):
            raise UnsupportedCompression(f"{path}: method {member.method}")

        header = self._read_at(member.local_offset, LOCAL_LEN)
        if len(header) < LOCAL_LEN or header[:4] != LOCAL_SIG:
            raise CorruptEntry(f"{path}: bad local header")
        name_len, extra_len = struct.unpack_from("<HH", header, 26)
        start = member.local_offset + LOCAL_LEN + name_len + extra_len
        raw = self._read_at(start, member.compressed_size)
        if len(raw) < member.compressed_size:
            raise CorruptEntry(f"{path}: member data runs past end of archive")

        if member.method == STORED:
            data = raw
        else:
            try:
                data = zlib.decompressobj(-zlib.MAX_WBITS).decompress(raw)
            except zlib.error as exc:
                raise CorruptEntry(f"{path}: {exc}") from None
        if len(data) != member.size or zlib.crc32(data) != member.crc:
            raise CorruptEntry(f"{path}: CRC mismatch")
        return data


def _decode_name(raw: bytes, flags: int) -> str:
    if flags & 0x800:
        name = raw.decode("utf-8", "replace")
    else:
        name = raw.decode("cp437")
    return name.replace("\\", "/")


def _parse_zip64_extra(extra: bytes, size: int, csize: int, offset: int):
    pos = 0
    while pos + 4 <= len(extra):
        tag, length = struct.unpack_from("<HH", extra, pos)
        body = extra[pos + 4:pos + 4 + length]
        if tag == 0x0001:
            vals = iter(struct.unpack_from(f"<{len(body) // 8}Q", body))
            if size == 0xFFFFFFFF:
                size = next(vals, size)
            if csize == 0xFFFFFFFF:
                csize = next(vals, csize)
            if offset == 0xFFFFFFFF:
                offset = next(vals, offset)
            break
        pos += 4 + length
    return size, csize, offset


def _scan(tail: bytes, tail_start: int, read_at, total: int, source: str):
    eocd = tail.rfind(EOCD_SIG, 0, max(0, len(tail) - EOCD_LEN + 4))
    if eocd < 0:
        head = read_at(0, 4)
        if head[:2] == b"PK":
            raise TruncatedArchive(f"{source}: no complete end-of-central-directory record")
        raise NotAZip(f"{source}: bad magic {head!r}")

    (_, _, _, _, count, cd_size, cd_offset, _) = struct.unpack_from("<4sHHHHIIH", tail, eocd)
    eocd_pos = tail_start + eocd

    if count == 0xFFFF or cd_size == 0xFFFFFFFF or cd_offset == 0xFFFFFFFF:
        loc = read_at(eocd_pos - 20, 20)
        if len(loc) == 20 and loc[:4] == ZIP64_LOCATOR_SIG:
            (z64_offset,) = struct.unpack_from("<Q", loc, 8)
            rec = read_at(z64_offset, 56)
            if len(rec) < 56 or rec[:4] != ZIP64_EOCD_SIG:
                raise TruncatedArchive(f"{source}: bad zip64 end record")
            count, cd_size, cd_offset = struct.unpack_from("<QQQ", rec, 32)

    if cd_offset + cd_size > eocd_pos or cd_offset + cd_size > total:
        raise TruncatedArchive(f"{source}: central directory lies past end of data")

    cdir = read_at(cd_offset, cd_size)
    members: dict[str, ZipMember] = {}
    pos = 0
    for _ in range(count):
        if pos + CDIR_LEN > len(cdir) or cdir[pos:pos + 4] != CDIR_SIG:
            raise TruncatedArchive(f"{source}: central directory entry is cut short")
        (_, _, _, flags, method, _, _, crc, csize, size,
         name_len, extra_len, comment_len, _, _, _, offset) = struct.unpack_from(
            "<4sHHHHHHIIIHHHHHII", cdir, pos)
        name_start = pos + CDIR_LEN
        name = _decode_name(cdir[name_start:name_start + name_len], flags)
        extra = cdir[name_start + name_len:name_start + name_len + extra_len]
        size, csize, offset = _parse_zip64_extra(extra, size, csize, offset)
        pos = name_start + name_len + extra_len + comment_len
        if pos > len(cdir):
            raise TruncatedArchive(f"{source}: central directory entry is cut short")
        if name.endswith("/"):
            continue
        if name in members:
            log.warning("%s: duplicate member %s ignored", source, name)
            continue
        members[name] = ZipMember(name, method, flags, crc, csize, size, offset)
    return members


def open_zip(path: str | os.PathLike) -> ZipArchive:
    path = os.fspath(path)
    total = os.path.getsize(path)
    tail_len = min(total, EOCD_LEN + MAX_COMMENT)
    with open(path, "rb") as fh:
        fh.seek(total - tail_len)
        tail = fh.read(tail_len)

    def read_at(offset: int, size: int) -> bytes:
        if offset < 0:
            return b""
        with open(path, "rb") as fh:
            fh.seek(offset)
            return fh.read(size)

    members = _scan(tail, total - tail_len, read_at, total, path)
    return ZipArchive(path, MappingProxyType(members))


def open_zip_bytes(data: bytes, source: str = "<memory>") -> ZipArchive:
    data = bytes(data)
    tail_start = max(0, len(data) - EOCD_LEN - MAX_COMMENT)

    def read_at(offset: int, size: int) -> bytes:
        if offset < 0:
            return b""
        return data[offset:offset + size]

    members = _scan(data[tail_start:], tail_start, read_at, len(data), source)
    return ZipArchive(source, MappingProxyType(members), data)
