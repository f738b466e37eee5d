import random
import struct

import pytest
from hypothesis import given, strategies as st

from oracles.strings_oracle import identifier_runs
from vrprivacy.errors import EmptyInput, TruncatedHeader
from vrprivacy.fixtures import build_metadata
from vrprivacy.il2cpp import HEADER, METADATA_MAGIC, ParseMode, parse_global_metadata, scan_identifiers

EYE_METHODS = [("EyeRender", 0x832CBC), ("GetEyeTrackingData", 0x1705848)]
ident = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,20}", fullmatch=True)


def test_structured_offsets():
    table = parse_global_metadata(build_metadata(EYE_METHODS))
    assert table.parse_mode is ParseMode.STRUCTURED
    assert dict(table.name_to_offset) == {"EyeRender": 0x832CBC, "GetEyeTrackingData": 0x1705848}
    assert table.method_names == ("EyeRender", "GetEyeTrackingData")


def test_declaring_types_qualify_names():
    data = build_metadata([("get_Confidence", 0x100), ("Update", 0x200)],
                          types=[("", "OVREyeGaze"), ("Game", "Player")], method_types=[0, 1])
    table = parse_global_metadata(data)
    assert set(table.name_to_offset) == {"OVREyeGaze::get_Confidence", "Game.Player::Update"}


@given(st.lists(st.tuples(ident, st.integers(0, 2**32 - 1)), max_size=30, unique_by=lambda t: t[0]),
       st.integers(24, 29))
def test_structured_round_trip(methods, version):
    table = parse_global_metadata(build_metadata(methods, version=version))
    assert dict(table.name_to_offset) == dict(methods)
    assert table.version == version


def test_empty():
    with pytest.raises(EmptyInput):
        parse_global_metadata(b"")


def test_short_header():
    with pytest.raises(TruncatedHeader):
        parse_global_metadata(struct.pack("<Ii", METADATA_MAGIC, 24))


def test_section_past_end():
    data = bytearray(build_metadata(EYE_METHODS))
    struct.pack_into("<I", data, 12, 10_000)  # string_size
    with pytest.raises(TruncatedHeader):
        parse_global_metadata(bytes(data))


def test_unknown_version_falls_back():
    table = parse_global_metadata(build_metadata(EYE_METHODS, version=31))
    assert table.parse_mode is ParseMode.STRING_SCAN
    assert dict(table.name_to_offset) == {}
    assert {"EyeRender", "GetEyeTrackingData"} <= table.raw_strings


def test_planted_string_in_noise():
    rng = random.Random(3)
    noise = bytes(rng.choice(b"\x00\x01\xff\x7f\x80 !#") for _ in range(4000))
    data = noise[:1500] + b"\0UPvr_getEyeTrackingPos\0" + noise[1500:]
    table = parse_global_metadata(data)
    assert table.parse_mode is ParseMode.STRING_SCAN
    assert "UPvr_getEyeTrackingPos" in table.raw_strings
    assert table.raw_strings == identifier_runs(data)


@given(st.binary(max_size=600), st.lists(ident.filter(lambda s: len(s) >= 4), max_size=5))
def test_scan_matches_oracle(noise, planted):
    data = b"\xff" + b"\xff".join(w.encode() for w in planted) + b"\xff" + noise
    assert scan_identifiers(data) == identifier_runs(data)
    assert set(planted) <= parse_global_metadata(data).raw_strings


def test_header_is_32_bytes():
    assert HEADER.size == 32
