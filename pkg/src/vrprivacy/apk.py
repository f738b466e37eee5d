"""APK containers: open, extract members, detect the build engine."""

from __future__ import annotations

import enum
import os
import posixpath
from dataclasses import dataclass
from typing import Mapping

from .ziparchive import ZipArchive, open_zip, open_zip_bytes

MANIFEST_PATH = "AndroidManifest.xml"


class EngineKind(str, enum.Enum):
    UNITY_IL2CPP = "UnityIl2cpp"
    UNITY_MONO = "UnityMono"
    UNREAL = "Unreal"
    UNKNOWN = "Unknown"

    @property
    def family(self) -> str | None:
        """Engine name as used by catalog rules ("Unity"/"Unreal")."""
        if self in (EngineKind.UNITY_IL2CPP, EngineKind.UNITY_MONO):
            return "Unity"
        if self is EngineKind.UNREAL:
            return "Unreal"
        return None


@dataclass(frozen=True)
class ApkPackage:
    source: str
    archive: ZipArchive

    @property
    def entries(self) -> Mapping[str, int]:
        return self.archive.entries

    def __contains__(self, path: str) -> bool:
        return path in self.archive

    def find(self, predicate) -> list[str]:
        return sorted(p for p in self.archive.members if predicate(p))


def open_apk(path: str | os.PathLike) -> ApkPackage:
    """List every member of an APK; no member data is read."""
    archive = open_zip(path)
    return ApkPackage(archive.source, archive)


def open_apk_bytes(data: bytes, source: str = "<memory>") -> ApkPackage:
    archive = open_zip_bytes(data, source)
    return ApkPackage(source, archive)


def extract_entry(pkg: ApkPackage, path: str) -> bytes:
    return pkg.archive.read(path)


def _is_native_lib(path: str, name: str) -> bool:
    parts = path.split("/")
    return len(parts) >= 2 and parts[0] == "lib" and parts[-1] == name


def engine_markers(pkg: ApkPackage) -> set[EngineKind]:
    """Every engine whose detection rule fires for this package."""
    markers: set[EngineKind] = set()
    paths = sorted(pkg.archive.members)
    if any(_is_native_lib(p, "libUE4.so") or p.lower().endswith(".pak") for p in paths):
        markers.add(EngineKind.UNREAL)
    has_il2cpp = any(_is_native_lib(p, "libil2cpp.so") for p in paths)
    if has_il2cpp:
        markers.add(EngineKind.UNITY_IL2CPP)
    else:
        for p in paths:
            if p.startswith("assets/") and posixpath.splitext(p)[1].lower() == ".dll":
                if pkg.archive.read(p)[:2] == b"MZ":
                    markers.add(EngineKind.UNITY_MONO)
                    break
    return markers


_PRECEDENCE = (EngineKind.UNREAL, EngineKind.UNITY_IL2CPP, EngineKind.UNITY_MONO)


def detect_engine(pkg: ApkPackage) -> EngineKind:
    markers = engine_markers(pkg)
    for kind in _PRECEDENCE:
        if kind in markers:
            return kind
    return EngineKind.UNKNOWN
