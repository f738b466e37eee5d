import io
import struct

import numpy as np
import pytest
from elftools.elf.elffile import ELFFile
from hypothesis import given, settings, strategies as st

from oracles.bl_oracle import decode
from vrprivacy.callgraph import (NamedCallGraph, extract_call_edges, name_matches, presence_evidence,
                                 reach_sensitive, read_text_section)
from vrprivacy.catalog import ApiRule
from vrprivacy.errors import NotElf, NoTextSection, WrongClassOrEndianness
from vrprivacy.fixtures import build_elf, build_metadata, encode_bl, text_with_calls
from vrprivacy.fixtures.native import NOP
from vrprivacy.il2cpp import parse_global_metadata

EYE_RENDER, GET_EYE = 0x832CBC, 0x1705848


def rule(name, kind="api", data_type="Eye"):
    return ApiRule("Pico", "Unity", data_type, kind, name)


def graph_of(text, base, methods):
    return extract_call_edges(build_elf(text, base), parse_global_metadata(build_metadata(methods)))


def test_eye_render_edge():
    base = 0x832000
    size = GET_EYE + 0x40 - base
    text = text_with_calls(base, size, {EYE_RENDER + 0x10: GET_EYE})
    g = graph_of(text, base, [("EyeRender", EYE_RENDER), ("GetEyeTrackingData", GET_EYE)])
    assert g.edges == {(EYE_RENDER, GET_EYE)}
    assert g.confidence[(EYE_RENDER, GET_EYE)] == "exact"
    assert g.name(EYE_RENDER) == "EyeRender"
    ev = reach_sensitive(g, [rule("GetEyeTrackingData")])
    assert [e.path for e in ev] == [("EyeRender", "GetEyeTrackingData")]


def test_all_nops():
    g = graph_of(struct.pack("<I", NOP) * 256, 0x1000, [("A", 0x1000)])
    assert g.edges == frozenset()
    assert g.nodes == {0x1000}


def _random_text(rng, n_words, base):
    words = []
    for i in range(n_words):
        roll = rng.random()
        if roll < 0.35:
            target = base + 4 * int(rng.integers(-8, n_words + 8))
            words.append(encode_bl(base + 4 * i, target))
        elif roll < 0.45:
            words.append(0x94000000 | int(rng.integers(0, 1 << 26)))
        else:
            words.append(int(rng.integers(0, 1 << 32)))
    return struct.pack(f"<{n_words}I", *words)


def test_matches_bruteforce_decoder_on_1000_sections():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        base = 0x10000 + 4 * int(rng.integers(0, 4096))
        n = 64
        text = _random_text(rng, n, base)
        offsets = sorted({base + 4 * int(k) for k in rng.integers(-4, n + 4, size=int(rng.integers(0, 8)))})
        methods = [(f"m{i}", o) for i, o in enumerate(offsets)]
        g = graph_of(text, base, methods)
        want = decode(text, base, {o: n for n, o in methods})
        assert dict(g.confidence) == want
        assert g.edges == set(want)
        assert set(offsets) <= g.nodes


@settings(max_examples=200)
@given(st.binary(min_size=0, max_size=256).map(lambda b: b[: len(b) - len(b) % 4]),
       st.lists(st.integers(0, 80), max_size=6))
def test_bruteforce_property(text, label_slots):
    base = 0x4000
    methods = [(f"f{i}", base + 4 * s) for i, s in enumerate(sorted(set(label_slots)))]
    g = graph_of(text, base, methods)
    assert dict(g.confidence) == decode(text, base, {o: n for n, o in methods})
    for caller, callee in g.edges:
        assert base <= callee < base + len(text)


def test_approx_when_unlabeled_target_between():
    base = 0x1000
    # label at base; something calls base+0x40 (unlabeled); a BL after that is ambiguous
    calls = {base + 0x8: base + 0x40, base + 0x50: base + 0x80}
    g = graph_of(text_with_calls(base, 0x100, calls), base, [("Root", base), ("Sink", base + 0x80)])
    assert g.confidence[(base, base + 0x40)] == "exact"
    assert g.confidence[(base, base + 0x80)] == "approx"


def test_approx_when_no_label_precedes():
    base = 0x1000
    g = graph_of(text_with_calls(base, 0x40, {base + 4: base + 0x20}), base, [("Late", base + 0x20)])
    assert g.confidence[(base + 4, base + 0x20)] == "approx"


def test_targets_outside_text_dropped():
    base = 0x1000
    text = text_with_calls(base, 0x40, {base: base + 0x1000, base + 4: base - 0x100})
    assert graph_of(text, base, [("A", base)]).edges == frozenset()


def test_text_section_matches_pyelftools():
    text = _random_text(np.random.default_rng(1), 100, 0x2000)
    elf = build_elf(text, 0x2000)
    ref = ELFFile(io.BytesIO(elf)).get_section_by_name(".text")
    got = read_text_section(elf)
    assert got.addr == ref["sh_addr"]
    assert got.data == ref.data()


@pytest.mark.parametrize("kwargs, exc", [
    ({"elf_class": 1}, WrongClassOrEndianness),
    ({"data_encoding": 2}, WrongClassOrEndianness),
    ({"machine": 62}, WrongClassOrEndianness),
    ({"text_name": b".data"}, NoTextSection),
])
def test_elf_errors(kwargs, exc):
    with pytest.raises(exc):
        read_text_section(build_elf(b"\0" * 16, 0x1000, **kwargs))


def test_not_elf():
    with pytest.raises(NotElf):
        read_text_section(b"MZ" + b"\0" * 100)


def _graph(edges, labels):
    nodes = set(labels) | {n for e in edges for n in e}
    return NamedCallGraph(frozenset(nodes), frozenset(edges), labels)


def test_reach_chain_uses_shortest_root_path():
    labels = {1: "Main", 2: "Helper", 3: "UPvr_getEyeTrackingPos", 4: "Other"}
    g = _graph({(1, 2), (2, 3), (1, 4), (4, 2)}, labels)
    ev = reach_sensitive(g, [rule("UPvr_getEyeTrackingPos")])
    assert [e.path for e in ev] == [("Main", "Helper", "UPvr_getEyeTrackingPos")]


def test_reach_isolated_node_is_its_own_root():
    g = _graph(set(), {5: "OVRFaceExpressions::Update"})
    ev = reach_sensitive(g, [rule("OVRFaceExpressions", kind="class", data_type="Face")])
    assert [(e.data_type, e.path) for e in ev] == [("Face", ("OVRFaceExpressions::Update",))]


def test_reach_no_match():
    g = _graph({(1, 2)}, {1: "Main", 2: "Render"})
    assert reach_sensitive(g, [rule("GetEyeTrackingData")]) == []


def test_reach_ignores_module_and_config_rules():
    g = _graph(set(), {1: "OculusEyeTracker"})
    assert reach_sensitive(g, [rule("OculusEyeTracker", kind="module")]) == []


def test_cycle_only_reachable():
    g = _graph({(1, 2), (2, 1)}, {1: "A", 2: "GetEyeTrackingData"})
    assert [e.path for e in reach_sensitive(g, [rule("GetEyeTrackingData")])] == [("GetEyeTrackingData",)]


@pytest.mark.parametrize("label, r, hit", [
    ("OVREyeGaze", rule("OVREyeGaze", "class"), True),
    ("Oculus.OVREyeGaze::get_Confidence", rule("OVREyeGaze", "class"), True),
    ("Game.NotOVREyeGazeX", rule("OVREyeGaze", "class"), True),  # long-name substring
    ("Foo::GetEyeTrackingData", rule("GetEyeTrackingData"), True),
    ("Hand", rule("Hands", "class"), False),
    ("MyHandsX", rule("Hands", "class"), False),
])
def test_name_matches(label, r, hit):
    assert name_matches(label, r) is hit


def test_presence_evidence_dedupes_per_rule():
    ev = presence_evidence(["OVREyeGaze", "Oculus.OVREyeGaze::Update"], [rule("OVREyeGaze", "class")])
    assert len(ev) == 1 and ev[0].path == ("OVREyeGaze",)
