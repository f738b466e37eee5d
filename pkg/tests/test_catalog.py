import json

import pytest
from hypothesis import given, strategies as st

from vrprivacy.catalog import (ANY_STORE, ENV_VAR, default_catalog_text, dump_catalog, load_catalog,
                               load_catalog_path, lookup, normalize_phrase)
from vrprivacy.errors import DuplicateRule, SchemaViolation, UnknownDataType

# store, engine, data type -> names, transcribed by hand from the published mapping
MAPPING = {
    ("Pico", "Unity", "Body"): ["GetBodyTrackingPose", "BodyTrackerRole", "BodyTrackerResult", "BodyTrackerTransform"],
    ("Pico", "Unity", "Face"): ["WantFaceTrackingService", "GetFaceTrackingSupported", "StartFaceTracking"],
    ("Pico", "Unity", "Eye"): ["UPvr_getEyeTrackingPos", "UPvr_getEyeTrackingData", "UPvr_getEyeTrackingGazeRay"],
    ("Pico", "Unity", "Hand"): ["GetHandScale", "GetJointLocations", "GetSettingState"],
    ("Pico", "Unreal", "Body"): ["PXR.Get_Body_Tracking_Pose", "PXR.Set_Swift_Mode", "PICOXRMotionTracking"],
    ("Pico", "Unreal", "Face"): ["Pico.Get_Face_Tracking_State", "Pico.Start_Face_Tracking", "EnableFaceTracking"],
    ("Pico", "Unreal", "Eye"): ["Pico.Get_Eye_Tracking_Gaze_Ray", "Pico.Set_Boundary_Visible", "PICOXRHMD",
                                "OpenXREyeTracker"],
    ("Pico", "Unreal", "Hand"): ["Pico.Get_Handness", "PicoMobileController", "PICOXRHMD", "OpenXRHandTracking"],
    ("Oculus", "Unity", "Body"): ["OVRBody", "OVRBone", "OVRCustomSkeleton"],
    ("Oculus", "Unity", "Face"): ["OVRCustomFace", "OVRCustomFaceExtensions", "OVRFace"],
    ("Oculus", "Unity", "Eye"): ["OVREyeGaze"],
    ("Oculus", "Unity", "Hand"): ["OVRHand"],
    ("Oculus", "Unreal", "Body"): ["OpenXRHMD", "OpenXREditor", "OpenXR"],
    ("Oculus", "Unreal", "Face"): ["FacialAnimation"],
    ("Oculus", "Unreal", "Eye"): ["OculusEyeTracker"],
    ("Oculus", "Unreal", "Hand"): ["GetHandJointTransform"],
}

CORPUS = {
    "Body": ["Body Tracking", "Motion Capture Data", "Physical Interaction Data", "User Posture and Movement"],
    "Face": ["Facial Recognition", "Facial Mapping", "Emotion Detection", "Facial Geometry Data", "Camera"],
    "Eye": ["Eye Tracking", "Gaze Detection", "Eye Movement Metrics", "Pupil Dilation Data", "Iris Scan"],
    "Hand": ["Hand Tracking", "Hand Size", "Hand Pose Data", "Touch Interaction", "Hand Movement Data"],
}


def _doc(**over):
    doc = {
        "api_rules": [{"store": "Pico", "engine": "Unity", "data_type": "Eye", "kind": "api", "name": "X"}],
        "policy_corpus": {k: ["p"] for k in CORPUS},
    }
    doc.update(over)
    return json.dumps(doc)


def test_every_mapping_cell_present(catalog):
    have = {(r.store, r.engine, r.data_type, r.name) for r in catalog.api_rules}
    missing = [(s, e, d, n) for (s, e, d), names in MAPPING.items() for n in names if (s, e, d, n) not in have]
    assert sum(len(v) for v in MAPPING.values()) >= 40
    assert missing == []


def test_corpus_transcribed(catalog):
    assert {k: list(v) for k, v in catalog.policy_corpus.items()} == CORPUS


def test_examples(catalog):
    rules = {(r.store, r.engine, r.data_type, r.kind, r.name) for r in catalog.api_rules}
    assert ("Pico", "Unity", "Eye", "api", "UPvr_getEyeTrackingPos") in rules
    assert "hand pose data" in {normalize_phrase(p) for p in catalog.policy_corpus["Hand"]}


def test_lookup(catalog):
    oculus_unity = {(r.data_type, r.kind, r.name) for r in lookup(catalog, "Oculus", "Unity")}
    assert ("Eye", "class", "OVREyeGaze") in oculus_unity
    oculus_unreal = {(r.data_type, r.kind, r.name) for r in lookup(catalog, "Oculus", "Unreal")}
    assert ("Eye", "module", "OculusEyeTracker") in oculus_unreal
    assert lookup(catalog, "Pico", "Godot") == []


def test_lookup_includes_any_store(catalog):
    names = {r.name for r in lookup(catalog, "Oculus", "Unreal")}
    assert "EnableEyeTracking" in names
    assert all(r.store in ("Oculus", ANY_STORE) for r in lookup(catalog, "Oculus", "Unreal"))


def test_unknown_store_only_gets_any_rules(catalog):
    assert {r.store for r in lookup(catalog, "Steam", "Unity")} <= {ANY_STORE}


def test_unknown_data_type():
    bad = _doc(api_rules=[{"store": "Pico", "engine": "Unity", "data_type": "Voice", "kind": "api", "name": "X"}])
    with pytest.raises(UnknownDataType):
        load_catalog(bad)


def test_duplicate_rule():
    rule = {"store": "Pico", "engine": "Unity", "data_type": "Eye", "kind": "api", "name": "X"}
    with pytest.raises(DuplicateRule):
        load_catalog(_doc(api_rules=[rule, dict(rule)]))


def test_same_module_two_types_allowed():
    rules = [{"store": "Pico", "engine": "Unreal", "data_type": d, "kind": "module", "name": "PICOXRHMD"}
             for d in ("Eye", "Hand")]
    assert len(load_catalog(_doc(api_rules=rules)).api_rules) == 2


@pytest.mark.parametrize("doc", [
    "not json",
    "[]",
    json.dumps({"api_rules": []}),
    _doc(api_rules=[{"store": "Pico", "engine": "Unity", "data_type": "Eye", "kind": "api"}]),
    _doc(api_rules=[{"store": "Pico", "engine": "Unity", "data_type": "Eye", "kind": "method", "name": "X"}]),
    _doc(api_rules=[{"store": "Pico", "engine": "Unity", "data_type": "Eye", "kind": "api", "name": "  "}]),
    _doc(policy_corpus={"Body": ["x"], "Face": ["x"], "Eye": ["x"]}),
    _doc(policy_corpus={"Body": ["x"], "Face": ["x"], "Eye": ["x"], "Hand": [""]}),
])
def test_schema_violations(doc):
    with pytest.raises(SchemaViolation):
        load_catalog(doc)


def _canon(cat):
    return (sorted(cat.api_rules, key=lambda r: (r.store, r.engine, r.data_type, r.kind, r.name)),
            {k: sorted(v) for k, v in cat.policy_corpus.items()})


def test_reserialize_round_trip(catalog):
    assert _canon(load_catalog(dump_catalog(catalog))) == _canon(catalog)


@given(st.randoms())
def test_round_trip_order_insensitive(rnd):
    doc = json.loads(default_catalog_text())
    rnd.shuffle(doc["api_rules"])
    for phrases in doc["policy_corpus"].values():
        rnd.shuffle(phrases)
    shuffled = load_catalog(json.dumps(doc))
    assert _canon(load_catalog(dump_catalog(shuffled))) == _canon(load_catalog(default_catalog_text()))


def test_env_var(tmp_path, monkeypatch):
    path = tmp_path / "c.json"
    path.write_text(_doc())
    monkeypatch.setenv(ENV_VAR, str(path))
    assert [r.name for r in load_catalog_path().api_rules] == ["X"]
    monkeypatch.delenv(ENV_VAR)
    assert len(load_catalog_path().api_rules) > 40


def test_normalize_phrase():
    assert normalize_phrase("  Hand-Pose\n Data ") == "hand pose data"
