import io
import zipfile
import zlib

import pytest
from hypothesis import given, strategies as st

from vrprivacy import apk
from vrprivacy.apk import EngineKind, detect_engine, engine_markers, extract_entry, open_apk, open_apk_bytes
from vrprivacy.errors import CorruptEntry, EntryNotFound, NotAZip, TruncatedArchive, UnsupportedCompression
from vrprivacy.fixtures import build_assembly, zip_bytes

path_part = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789_-", min_size=1, max_size=8)
paths = st.lists(path_part, min_size=1, max_size=4).map("/".join)


def _write(tmp_path, data, name="a.apk"):
    p = tmp_path / name
    p.write_bytes(data)
    return p


def test_two_entry_listing(tmp_path):
    data = zip_bytes({"AndroidManifest.xml": b"<manifest/>", "lib/arm64-v8a/libUE4.so": b"\x7fELF"})
    pkg = open_apk(_write(tmp_path, data))
    assert dict(pkg.entries) == {"AndroidManifest.xml": 11, "lib/arm64-v8a/libUE4.so": 4}


def test_empty_zip(tmp_path):
    assert len(open_apk(_write(tmp_path, zip_bytes({}))).entries) == 0


def test_bare_eocd_matches_reference_listing():
    data = b"PK\x05\x06" + b"\0" * 18
    assert zipfile.ZipFile(io.BytesIO(data)).namelist() == []
    assert dict(open_apk_bytes(data).entries) == {}


def test_stored_passthrough():
    pkg = open_apk_bytes(zip_bytes({"x.txt": b"abc"}, compress=False))
    assert extract_entry(pkg, "x.txt") == b"abc"


def test_deflate_zeros():
    pkg = open_apk_bytes(zip_bytes({"z.bin": bytes(10240)}))
    assert pkg.archive.members["z.bin"].method == zipfile.ZIP_DEFLATED
    assert extract_entry(pkg, "z.bin") == bytes(10240)


def test_missing_entry():
    with pytest.raises(EntryNotFound):
        extract_entry(open_apk_bytes(zip_bytes({"a": b"1"})), "missing.txt")


@given(st.dictionaries(paths, st.binary(max_size=2048), max_size=12), st.booleans())
def test_round_trip_against_zipfile(files, compress):
    data = zip_bytes(files, compress=compress)
    pkg = open_apk_bytes(data)
    ref = zipfile.ZipFile(io.BytesIO(data))
    assert dict(pkg.entries) == {i.filename: i.file_size for i in ref.infolist()}
    for name, payload in files.items():
        assert extract_entry(pkg, name) == payload == ref.read(name)


def test_not_a_zip(tmp_path):
    with pytest.raises(NotAZip):
        open_apk(_write(tmp_path, b"this is not a zip archive at all"))


def test_truncated(tmp_path):
    data = zip_bytes({"a.txt": b"hello" * 100})
    with pytest.raises(TruncatedArchive):
        open_apk(_write(tmp_path, data[: len(data) - 10]))


def test_io_error(tmp_path):
    with pytest.raises(OSError):
        open_apk(tmp_path / "nope.apk")


def test_unsupported_method():
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_BZIP2) as zf:
        zf.writestr("a.txt", b"abc" * 50)
    with pytest.raises(UnsupportedCompression):
        extract_entry(open_apk_bytes(buf.getvalue()), "a.txt")


def test_crc_mismatch():
    data = bytearray(zip_bytes({"a.txt": b"abcdef"}, compress=False))
    i = data.find(b"abcdef")
    data[i] = ord("X")
    with pytest.raises(CorruptEntry):
        extract_entry(open_apk_bytes(bytes(data)), "a.txt")


def test_corrupt_deflate_stream():
    good = zip_bytes({"a.txt": b"q" * 500})
    pkg = open_apk_bytes(good)
    m = pkg.archive.members["a.txt"]
    data = bytearray(good)
    start = data.find(zlib.compress(b"q" * 500)[2:6])
    assert start > 0 and m.method == zipfile.ZIP_DEFLATED
    data[start] ^= 0xFF
    with pytest.raises(CorruptEntry):
        extract_entry(open_apk_bytes(bytes(data)), "a.txt")


def _pkg(paths, dll=b""):
    files = {p: b"x" for p in paths}
    if dll:
        files["assets/bin/Data/Managed/Game.dll"] = dll
    return open_apk_bytes(zip_bytes(files))


@pytest.mark.parametrize("paths, expected", [
    (["lib/arm64-v8a/libil2cpp.so"], EngineKind.UNITY_IL2CPP),
    (["lib/arm64-v8a/libUE4.so"], EngineKind.UNREAL),
    (["lib/armeabi-v7a/libUE4.so"], EngineKind.UNREAL),
    (["assets/Game.pak"], EngineKind.UNREAL),
    (["classes.dex", "res/icon.png"], EngineKind.UNKNOWN),
    (["libil2cpp.so"], EngineKind.UNKNOWN),
    (["lib/arm64-v8a/libil2cpp.so", "lib/arm64-v8a/libUE4.so"], EngineKind.UNREAL),
])
def test_detect_engine(paths, expected):
    assert detect_engine(_pkg(paths)) is expected


def test_mono_needs_pe_magic():
    assert detect_engine(_pkg([], dll=build_assembly())) is EngineKind.UNITY_MONO
    assert detect_engine(_pkg([], dll=b"not a pe")) is EngineKind.UNKNOWN


def test_il2cpp_beats_mono():
    pkg = _pkg(["lib/arm64-v8a/libil2cpp.so"], dll=build_assembly())
    assert detect_engine(pkg) is EngineKind.UNITY_IL2CPP


def test_markers_report_all_engines():
    pkg = _pkg(["lib/arm64-v8a/libil2cpp.so", "lib/x86/libUE4.so"])
    assert engine_markers(pkg) == {EngineKind.UNREAL, EngineKind.UNITY_IL2CPP}


marker_paths = st.lists(st.sampled_from([
    "lib/arm64-v8a/libil2cpp.so", "lib/arm64-v8a/libUE4.so", "assets/x.pak", "classes.dex",
    "assets/bin/Data/Managed/A.dll", "res/a.png",
]), unique=True)


@given(marker_paths, st.randoms())
def test_detect_engine_order_independent(paths, rnd):
    files = {p: (build_assembly() if p.endswith(".dll") else b"x") for p in paths}
    first = detect_engine(open_apk_bytes(zip_bytes(files)))
    items = list(files.items())
    rnd.shuffle(items)
    assert detect_engine(open_apk_bytes(zip_bytes(dict(items)))) is first


def test_family():
    assert EngineKind.UNITY_MONO.family == "Unity"
    assert EngineKind.UNREAL.family == "Unreal"
    assert EngineKind.UNKNOWN.family is None
    assert apk.MANIFEST_PATH == "AndroidManifest.xml"
