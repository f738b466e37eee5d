"""Reference writers for every binary format the analyzers read.

Used by the test suite and by ``scripts/make_corpus.py`` to build
synthetic apps; each writer is the inverse of one parser.
"""

from __future__ import annotations

import io
import json
import zipfile

from .axml import encode_axml, manifest_xml
from .native import build_elf, build_metadata, encode_bl, text_with_calls
from .pak import pak_listing, write_pak
from .pe import AssemblySpec, build_assembly

__all__ = [
    "AssemblySpec", "build_apk", "build_assembly", "build_elf", "build_metadata", "encode_axml",
    "encode_bl", "manifest_xml", "pak_listing", "text_with_calls", "write_pak", "zip_bytes",
    "unity_il2cpp_apk", "unity_mono_apk", "unreal_apk", "uplugin_json",
]

IL2CPP_LIB = "lib/arm64-v8a/libil2cpp.so"
METADATA_PATH = "assets/bin/Data/Managed/Metadata/global-metadata.dat"
MONO_ASSEMBLY = "assets/bin/Data/Managed/Assembly-CSharp.dll"
UE4_LIB = "lib/arm64-v8a/libUE4.so"
OBB_PATH = "assets/main.obb.png"


def zip_bytes(files: dict[str, bytes], *, compress: bool = True) -> bytes:
    buf = io.BytesIO()
    method = zipfile.ZIP_DEFLATED if compress else zipfile.ZIP_STORED
    with zipfile.ZipFile(buf, "w", method) as zf:
        for path, data in files.items():
            zf.writestr(path, data)
    return buf.getvalue()


def build_apk(files: dict[str, bytes], *, package: str = "com.example.vr",
              permissions: list[str] = (), binary_manifest: bool = True) -> bytes:
    manifest = manifest_xml(package, list(permissions))
    out = {"AndroidManifest.xml": encode_axml(manifest) if binary_manifest else manifest.encode()}
    out.update(files)
    return zip_bytes(out)


def uplugin_json(modules: list[str], name: str = "Plugin") -> bytes:
    doc = {
        "FileVersion": 3,
        "FriendlyName": name,
        "Modules": [{"Name": m, "Type": "Runtime", "LoadingPhase": "Default"} for m in modules],
    }
    return json.dumps(doc, indent="\t").encode()


def unreal_apk(*, ini: str | None = None, plugins: dict[str, list[str]] | None = None,
               app: str = "MyApp", pak_version: int = 3, encrypted_index: bool = False,
               **apk_kwargs) -> bytes:
    files = {}
    if ini is not None:
        files[f"{app}/Config/DefaultEngine.ini"] = ini.encode()
    for plugin, modules in (plugins or {}).items():
        files[f"{app}/Plugins/{plugin}/{plugin}.uplugin"] = uplugin_json(modules, plugin)
    files[f"{app}/Content/Maps/Main.umap"] = b"\0" * 64
    pak = write_pak(files, version=pak_version, encrypted_index=encrypted_index)
    obb = zip_bytes({f"{app}/Content/Paks/{app}-Android_ASTC.pak": pak}, compress=False)
    return build_apk({UE4_LIB: b"\x7fELF" + b"\0" * 60, OBB_PATH: obb}, **apk_kwargs)


def unity_il2cpp_apk(*, methods: list[tuple[str, int]], calls: dict[int, int],
                     text_base: int, text_size: int, metadata_version: int = 24,
                     **apk_kwargs) -> bytes:
    text = text_with_calls(text_base, text_size, calls)
    return build_apk({
        IL2CPP_LIB: build_elf(text, text_base),
        METADATA_PATH: build_metadata(methods, version=metadata_version),
    }, **apk_kwargs)


def unity_mono_apk(spec: AssemblySpec, **apk_kwargs) -> bytes:
    return build_apk({
        "lib/arm64-v8a/libmonobdwgc-2.0.so": b"\x7fELF" + b"\0" * 60,
        MONO_ASSEMBLY: build_assembly(spec),
    }, **apk_kwargs)
