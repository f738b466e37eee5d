import struct

import pytest
from hypothesis import given, strategies as st

from oracles.dotnet_oracle import listing
from vrprivacy.dotnet import parse_dotnet_names
from vrprivacy.errors import CorruptMetadata, NoCliHeader, NotPe
from vrprivacy.fixtures import AssemblySpec, build_assembly

ident = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,12}", fullmatch=True)
ns = st.one_of(st.just(""), st.from_regex(r"[A-Z][a-z]{1,6}(\.[A-Z][a-z]{1,6})?", fullmatch=True))


@st.composite
def specs(draw):
    typerefs = draw(st.lists(st.tuples(ns, ident), max_size=6))
    typedefs = [("", "<Module>", [])] + draw(st.lists(st.tuples(ns, ident, st.lists(ident, max_size=4)), max_size=4))
    parents = [("typeref", i) for i in range(len(typerefs))] + [("typedef", i) for i in range(len(typedefs))]
    memberrefs = [(k, i, draw(ident)) for k, i in draw(st.lists(st.sampled_from(parents), max_size=6))]
    return AssemblySpec(typerefs, typedefs, memberrefs)


def test_member_ref():
    spec = AssemblySpec(typerefs=[("", "OVREyeGaze")], memberrefs=[("typeref", 0, "get_Confidence")])
    names = parse_dotnet_names(build_assembly(spec))
    assert "OVREyeGaze::get_Confidence" in names
    assert names == listing(build_assembly(spec))


def test_empty_module():
    assert parse_dotnet_names(build_assembly()) == {"<Module>"}


def test_no_cli_header():
    with pytest.raises(NoCliHeader):
        parse_dotnet_names(build_assembly(with_cli=False))


def test_not_pe():
    with pytest.raises(NotPe):
        parse_dotnet_names(b"\x7fELF" + b"\0" * 200)
    with pytest.raises(NotPe):
        parse_dotnet_names(b"MZ" + b"\0" * 10)


def test_corrupt_strings_index():
    spec = AssemblySpec(typerefs=[("Oculus", "OVREyeGaze")])
    data = bytearray(build_assembly(spec))
    # shrink the #Strings stream header size so the names fall outside it
    i = data.find(b"#Strings\0")
    struct.pack_into("<I", data, i - 4, 4)
    with pytest.raises(CorruptMetadata):
        parse_dotnet_names(bytes(data))


def test_bad_signature():
    data = bytearray(build_assembly())
    i = data.find(b"BSJB")
    data[i:i + 4] = b"XXXX"
    with pytest.raises(CorruptMetadata):
        parse_dotnet_names(bytes(data))


@given(specs())
def test_agrees_with_dnfile(spec):
    data = build_assembly(spec)
    names = parse_dotnet_names(data)
    assert names == spec.expected_names()
    assert names == listing(data)
