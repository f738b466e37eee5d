"""AndroidManifest.xml parsing, plain-text or Android binary XML (AXML)."""

from __future__ import annotations

import logging
import struct
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import MalformedXml, MissingManifestElement, UnsupportedChunkVersion

log = logging.getLogger(__name__)

ANDROID_NS = "http://schemas.android.com/apk/res/android"

RES_STRING_POOL_TYPE = 0x0001
RES_XML_TYPE = 0x0003
RES_XML_START_NAMESPACE_TYPE = 0x0100
RES_XML_END_NAMESPACE_TYPE = 0x0101
RES_XML_START_ELEMENT_TYPE = 0x0102
RES_XML_END_ELEMENT_TYPE = 0x0103
RES_XML_CDATA_TYPE = 0x0104
RES_XML_RESOURCE_MAP_TYPE = 0x0180

UTF8_FLAG = 1 << 8
TYPE_STRING = 0x03
NO_INDEX = 0xFFFFFFFF

# android:name resource id, used when the attribute name string is stripped
ATTR_NAME_RES_ID = 0x01010003

PERMISSION_TAGS = ("uses-permission", "uses-permission-sdk-23")


@dataclass(frozen=True)
class ManifestInfo:
    package_name: str
    permissions: frozenset[str]
    # encoding is not part of the logical document
    is_binary_xml: bool = field(default=False, compare=False)


@dataclass
class _Element:
    tag: str
    attrs: dict[tuple[str, str], str]


def _clean_permissions(values) -> frozenset[str]:
    out = set()
    for value in values:
        value = (value or "").strip()
        if not value or any(c.isspace() for c in value):
            log.warning("skipping malformed permission label %r", value)
            continue
        out.add(value)
    return frozenset(out)


def _from_elements(elements: list[_Element], is_binary: bool) -> ManifestInfo:
    if not elements or elements[0].tag != "manifest":
        raise MissingManifestElement("root element is not <manifest>")
    package = elements[0].attrs.get(("", "package"), "")
    perms = [
        e.attrs.get((ANDROID_NS, "name"))
        for e in elements
        if e.tag in PERMISSION_TAGS
    ]
    return ManifestInfo(package, _clean_permissions(perms), is_binary)


# --- plain text -------------------------------------------------------------

def _parse_plain(data: bytes) -> list[_Element]:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from None
    elements = []
    for node in root.iter():
        attrs = {}
        for key, value in node.attrib.items():
            if key.startswith("{"):
                ns, _, local = key[1:].partition("}")
            else:
                ns, local = "", key
            attrs[(ns, local)] = value
        elements.append(_Element(node.tag, attrs))
    return elements


# --- binary -------------------------------------------------------------------

def _read_string_pool(data: bytes, start: int, header_size: int, size: int) -> list[str]:
    if header_size != 28:
        raise UnsupportedChunkVersion(f"string pool header size {header_size}")
    count, _styles, flags, strings_start, _styles_start = struct.unpack_from("<IIIII", data, start + 8)
    if start + 28 + 4 * count > start + size:
        raise MalformedXml("string offsets run past string pool")
    offsets = struct.unpack_from(f"<{count}I", data, start + 28)
    base = start + strings_start
    end = start + size
    utf8 = bool(flags & UTF8_FLAG)
    strings = []
    for off in offsets:
        pos = base + off
        if pos >= end:
            raise MalformedXml("string offset out of range")
        try:
            if utf8:
                # utf-16 length, then utf-8 byte length; each 1 or 2 bytes
                n = data[pos]
                pos += 2 if n & 0x80 else 1
                n = data[pos]
                if n & 0x80:
                    n = ((n & 0x7F) << 8) | data[pos + 1]
                    pos += 2
                else:
                    pos += 1
                raw = data[pos:pos + n]
                if pos + n > end:
                    raise MalformedXml("string runs past string pool")
                strings.append(raw.decode("utf-8"))
            else:
                (n,) = struct.unpack_from("<H", data, pos)
                pos += 2
                if n & 0x8000:
                    (lo,) = struct.unpack_from("<H", data, pos)
                    n = ((n & 0x7FFF) << 16) | lo
                    pos += 2
                if pos + 2 * n > end:
                    raise MalformedXml("string runs past string pool")
                strings.append(data[pos:pos + 2 * n].decode("utf-16-le"))
        except (IndexError, struct.error, UnicodeDecodeError) as exc:
            raise MalformedXml(f"bad string pool entry: {exc}") from None
    return strings


def _parse_binary(data: bytes) -> list[_Element]:
    if len(data) < 8:
        raise MalformedXml("truncated AXML header")
    ftype, fheader, fsize = struct.unpack_from("<HHI", data, 0)
    if fheader != 8:
        raise UnsupportedChunkVersion(f"XML header size {fheader}")
    if fsize > len(data):
        raise MalformedXml("document size exceeds data")

    strings: list[str] = []
    res_ids: list[int] = []
    namespaces: dict[str, str] = {}
    elements: list[_Element] = []

    def s(idx: int) -> str:
        if idx == NO_INDEX:
            return ""
        if idx >= len(strings):
            raise MalformedXml(f"string index {idx} out of range")
        return strings[idx]

    pos = 8
    while pos < fsize:
        if pos + 8 > fsize:
            raise MalformedXml("truncated chunk header")
        ctype, header_size, size = struct.unpack_from("<HHI", data, pos)
        if size < 8 or pos + size > fsize:
            raise MalformedXml(f"chunk 0x{ctype:04x} at {pos} has bad size {size}")

        if ctype == RES_STRING_POOL_TYPE:
            strings = _read_string_pool(data, pos, header_size, size)
        elif ctype == RES_XML_RESOURCE_MAP_TYPE:
            res_ids = list(struct.unpack_from(f"<{(size - header_size) // 4}I", data, pos + header_size))
        elif RES_XML_START_NAMESPACE_TYPE <= ctype <= RES_XML_CDATA_TYPE:
            if header_size != 16:
                raise UnsupportedChunkVersion(f"XML node header size {header_size}")
            body = pos + header_size
            if ctype == RES_XML_START_NAMESPACE_TYPE:
                prefix, uri = struct.unpack_from("<II", data, body)
                namespaces[s(prefix)] = s(uri)
            elif ctype == RES_XML_START_ELEMENT_TYPE:
                if size < header_size + 20:
                    raise MalformedXml("truncated start element")
                (_ns, name, attr_start, attr_size, attr_count,
                 _id, _cls, _style) = struct.unpack_from("<IIHHHHHH", data, body)
                if attr_size != 20:
                    raise UnsupportedChunkVersion(f"attribute size {attr_size}")
                if attr_start + attr_count * attr_size > size - header_size:
                    raise MalformedXml("attributes run past element chunk")
                attrs = {}
                for i in range(attr_count):
                    a = body + attr_start + i * attr_size
                    a_ns, a_name, a_raw, _vsize, _res0, vtype, vdata = struct.unpack_from(
                        "<IIIHBBI", data, a)
                    local = s(a_name)
                    if not local and a_name < len(res_ids) and res_ids[a_name] == ATTR_NAME_RES_ID:
                        local = "name"
                    if a_raw != NO_INDEX:
                        value = s(a_raw)
                    elif vtype == TYPE_STRING:
                        value = s(vdata)
                    else:
                        value = str(vdata)
                    attrs[(s(a_ns), local)] = value
                elements.append(_Element(s(name), attrs))
        # other chunk types (end nodes, CDATA, unknown) carry nothing we need
        pos += size
    return elements


def is_binary_xml(data: bytes) -> bool:
    return len(data) >= 2 and struct.unpack_from("<H", data, 0)[0] == RES_XML_TYPE


def parse_manifest(data: bytes) -> ManifestInfo:
    if is_binary_xml(data):
        return _from_elements(_parse_binary(data), True)
    return _from_elements(_parse_plain(data), False)
