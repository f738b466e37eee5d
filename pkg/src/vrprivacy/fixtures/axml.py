"""Android binary XML encoder, the inverse of ``vrprivacy.manifest``."""

from __future__ import annotations

import struct
import xml.etree.ElementTree as ET

from ..manifest import (
    ATTR_NAME_RES_ID,
    NO_INDEX,
    RES_STRING_POOL_TYPE,
    RES_XML_END_ELEMENT_TYPE,
    RES_XML_END_NAMESPACE_TYPE,
    RES_XML_RESOURCE_MAP_TYPE,
    RES_XML_START_ELEMENT_TYPE,
    RES_XML_START_NAMESPACE_TYPE,
    RES_XML_TYPE,
    TYPE_STRING,
    UTF8_FLAG,
)

KNOWN_PREFIXES = {"http://schemas.android.com/apk/res/android": "android"}


def _len_prefix_utf8(n: int) -> bytes:
    if n > 0x7F:
        return bytes([0x80 | (n >> 8), n & 0xFF])
    return bytes([n])


def _string_pool(strings: list[str], utf8: bool) -> bytes:
    blobs = []
    for s in strings:
        if utf8:
            raw = s.encode("utf-8")
            blobs.append(_len_prefix_utf8(len(s)) + _len_prefix_utf8(len(raw)) + raw + b"\0")
        else:
            raw = s.encode("utf-16-le")
            n = len(raw) // 2
            head = struct.pack("<HH", 0x8000 | (n >> 16), n & 0xFFFF) if n > 0x7FFF else struct.pack("<H", n)
            blobs.append(head + raw + b"\0\0")
    offsets, pos = [], 0
    for b in blobs:
        offsets.append(pos)
        pos += len(b)
    data = b"".join(blobs)
    data += b"\0" * (-len(data) % 4)
    header_size = 28
    strings_start = header_size + 4 * len(strings)
    size = strings_start + len(data)
    return (
        struct.pack("<HHIIIIII", RES_STRING_POOL_TYPE, header_size, size, len(strings), 0,
                    UTF8_FLAG if utf8 else 0, strings_start, 0)
        + struct.pack(f"<{len(strings)}I", *offsets)
        + data
    )


def _split(key: str) -> tuple[str, str]:
    if key.startswith("{"):
        ns, _, local = key[1:].partition("}")
        return ns, local
    return "", key


def encode_axml(doc: str | bytes | ET.Element, *, utf8: bool = False,
                strip_attr_names: bool = False) -> bytes:
    """Encode an XML document as Android binary XML.

    ``strip_attr_names`` mimics optimizing packers that blank the
    ``android:name`` attribute string and rely on the resource map.
    """
    root = ET.fromstring(doc) if isinstance(doc, (str, bytes)) else doc

    strings: list[str] = []
    index: dict[str, int] = {}

    def intern(s: str) -> int:
        if s not in index:
            index[s] = len(strings)
            strings.append(s)
        return index[s]

    # resource-mapped attribute names must occupy the first pool slots
    res_ids: list[int] = []
    namespaces: dict[str, str] = {}
    for node in root.iter():
        for key in node.attrib:
            ns, local = _split(key)
            if ns:
                namespaces.setdefault(ns, KNOWN_PREFIXES.get(ns, f"ns{len(namespaces)}"))
                if local == "name" and not res_ids:
                    intern("" if strip_attr_names else "name")
                    res_ids.append(ATTR_NAME_RES_ID)

    body = []
    for uri, prefix in sorted(namespaces.items()):
        body.append(struct.pack("<HHIIIII", RES_XML_START_NAMESPACE_TYPE, 16, 24, 1, NO_INDEX,
                                intern(prefix), intern(uri)))

    def element(node: ET.Element, line: int) -> None:
        ns, tag = _split(node.tag)
        ns_idx = intern(ns) if ns else NO_INDEX
        attrs = []
        for key, value in node.attrib.items():
            a_ns, local = _split(key)
            if a_ns and local == "name" and res_ids:
                name_idx = 0
            else:
                name_idx = intern(local)
            v_idx = intern(value)
            attrs.append(struct.pack("<IIIHBBI", intern(a_ns) if a_ns else NO_INDEX, name_idx,
                                     v_idx, 8, 0, TYPE_STRING, v_idx))
        payload = struct.pack("<IIHHHHHH", ns_idx, intern(tag), 20, 20, len(attrs), 0, 0, 0)
        chunk = payload + b"".join(attrs)
        body.append(struct.pack("<HHIII", RES_XML_START_ELEMENT_TYPE, 16, 16 + len(chunk), line,
                                NO_INDEX) + chunk)
        for child in node:
            element(child, line + 1)
        body.append(struct.pack("<HHIIIII", RES_XML_END_ELEMENT_TYPE, 16, 24, line, NO_INDEX,
                                ns_idx, intern(tag)))

    element(root, 1)
    for uri, prefix in sorted(namespaces.items(), reverse=True):
        body.append(struct.pack("<HHIIIII", RES_XML_END_NAMESPACE_TYPE, 16, 24, 1, NO_INDEX,
                                intern(prefix), intern(uri)))

    chunks = [_string_pool(strings, utf8)]
    if res_ids:
        chunks.append(struct.pack("<HHI", RES_XML_RESOURCE_MAP_TYPE, 8, 8 + 4 * len(res_ids))
                      + struct.pack(f"<{len(res_ids)}I", *res_ids))
    chunks.extend(body)
    payload = b"".join(chunks)
    return struct.pack("<HHI", RES_XML_TYPE, 8, 8 + len(payload)) + payload


def manifest_xml(package: str, permissions: list[str]) -> str:
    lines = [
        '<?xml version="1.0" encoding="utf-8"?>',
        f'<manifest xmlns:android="http://schemas.android.com/apk/res/android" package="{package}">',
    ]
    for perm in permissions:
        lines.append(f'  <uses-permission android:name="{perm}" />')
    lines.append('  <application android:label="app" />')
    lines.append("</manifest>")
    return "\n".join(lines)
