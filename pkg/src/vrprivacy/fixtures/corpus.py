"""Synthetic app corpora: store records, APKs and policy texts with known ground truth.

``AppSpec`` says what an app does and declares; ``write_corpus`` materialises
a list of specs as ``records.json``, ``apks/<id>.apk``, ``policies/<id>.txt``
and ``expected.json`` (the ground truth the report is checked against).
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import AssemblySpec, build_apk, build_metadata, build_elf, text_with_calls, unity_mono_apk, unreal_apk
from . import IL2CPP_LIB, METADATA_PATH

DATA_TYPES = ("Body", "Face", "Eye", "Hand")
STORES = ("Oculus", "Viveport", "Pico", "Microsoft", "PlayStation")
ENGINES = ("unreal", "il2cpp", "mono", "unknown", "unreal_encrypted", "il2cpp_no_metadata")
CATEGORIES = ("Game", "Education", "Social", "Fitness")

POLICY_PHRASE = {"Body": "body tracking", "Face": "facial mapping", "Eye": "eye tracking", "Hand": "hand tracking"}

# what each engine build plants for a data type, per store family
UNREAL_PLANT = {
    "Pico": {"Body": ("module", "PICOXRMotionTracking"), "Face": ("config", "EnableFaceTracking"),
             "Eye": ("config", "EnableEyeTracking"), "Hand": ("module", "OpenXRHandTracking")},
    "Oculus": {"Body": ("module", "OpenXRHMD"), "Face": ("module", "FacialAnimation"),
               "Eye": ("module", "OculusEyeTracker")},
}
IL2CPP_PLANT = {
    "Pico": {"Body": ("", "GetBodyTrackingPose"), "Face": ("", "StartFaceTracking"),
             "Eye": ("", "UPvr_getEyeTrackingData"), "Hand": ("", "GetHandScale")},
    "Oculus": {"Body": ("OVRBody", "GetSkeletonType"), "Face": ("OVRFace", "UpdateWeights"),
               "Eye": ("OVREyeGaze", "get_Confidence"), "Hand": ("OVRHand", "GetFingerIsPinching")},
}


def plant_family(store: str) -> str:
    # stores without their own catalog rows are checked against every store's rules
    return "Oculus" if store == "Oculus" else "Pico"


@dataclass
class AppSpec:
    app_id: str
    store: str
    name: str
    engine: str
    accesses: list[str] = field(default_factory=list)
    declared: list[str] = field(default_factory=list)
    vague: bool = False
    policy: str = "long"          # long | short | none
    vr_terms: bool = True
    children_age: int | None = None
    age_rating: int | str | None = None
    category: str = "Game"
    permissions: list[str] = field(default_factory=list)
    declared_permissions: list[str] | None = None
    policy_url: str | None = None
    supported_languages: list[str] = field(default_factory=list)

    def effective_accesses(self) -> list[str]:
        if self.engine not in ("unreal", "il2cpp", "mono"):
            return []
        if self.engine == "unreal":
            plant = UNREAL_PLANT[plant_family(self.store)]
            return [d for d in DATA_TYPES if d in self.accesses and d in plant]
        return [d for d in DATA_TYPES if d in self.accesses]

    def status(self) -> str:
        return {"unreal": "Complete", "il2cpp": "Complete", "mono": "Complete", "unknown": "Unsupported"}.get(
            self.engine, "LacksFiles")

    def record(self) -> dict:
        return {
            "app_id": self.app_id, "store": self.store, "name": self.name, "age_rating": self.age_rating,
            "category": self.category, "declared_permissions": self.declared_permissions,
            "supported_languages": self.supported_languages, "policy_url": self.policy_url,
            "play_style": "Standing", "environment_requirement": None,
        }


def build_app(spec: AppSpec) -> bytes:
    kw = {"package": f"com.synthetic.{spec.app_id.replace('-', '_')}", "permissions": spec.permissions}
    family = plant_family(spec.store)
    if spec.engine in ("unreal", "unreal_encrypted"):
        plant = UNREAL_PLANT[family]
        keys = [plant[d][1] for d in spec.accesses if d in plant and plant[d][0] == "config"]
        modules = [plant[d][1] for d in spec.accesses if d in plant and plant[d][0] == "module"]
        ini = "[/Script/Engine.RendererSettings]\nr.MobileHDR=False\n\n[/Script/XRSettings]\n"
        ini += "".join(f"{k}=True\n" for k in keys)
        ini += "EnableFaceTracking=False\n" if "EnableFaceTracking" not in keys else ""
        plugins = {"XRPlugin": modules + ["XRBase"]}
        return unreal_apk(ini=ini, plugins=plugins, app=spec.name.replace(" ", ""),
                          pak_version=4 if spec.engine == "unreal_encrypted" else 3,
                          encrypted_index=spec.engine == "unreal_encrypted", **kw)
    if spec.engine in ("il2cpp", "il2cpp_no_metadata"):
        base, size = 0x100000, 0x4000
        plant = IL2CPP_PLANT[family]
        types = [("", "GameManager")]
        methods = [("Update", base)]
        method_types = [0]
        calls = {}
        for k, d in enumerate(d for d in DATA_TYPES if d in spec.accesses):
            cls, name = plant[d]
            offset = base + 0x1000 + 0x100 * k
            if cls:
                types.append(("", cls))
                method_types.append(len(types) - 1)
            else:
                method_types.append(-1)
            methods.append((name, offset))
            calls[base + 4 + 4 * k] = offset
        methods.append(("Unused", base + 0x3000))
        method_types.append(-1)
        files = {IL2CPP_LIB: build_elf(text_with_calls(base, size, calls), base)}
        if spec.engine == "il2cpp":
            files[METADATA_PATH] = build_metadata(methods, types=types, method_types=method_types)
        return build_apk(files, **kw)
    if spec.engine == "mono":
        plant = IL2CPP_PLANT[family]
        typerefs, memberrefs = [("UnityEngine", "MonoBehaviour")], []
        for d in (d for d in DATA_TYPES if d in spec.accesses):
            cls, name = plant[d]
            if cls:
                typerefs.append(("", cls))
                memberrefs.append(("typeref", len(typerefs) - 1, name))
            else:
                typerefs.append(("Unity.XR.PXR", f"PXR_{d}"))
                memberrefs.append(("typeref", len(typerefs) - 1, name))
        asm = AssemblySpec(typerefs=typerefs, typedefs=[("", "<Module>", []), ("", "Player", ["Start", "Update"])],
                           memberrefs=memberrefs)
        return unity_mono_apk(asm, **kw)
    return build_apk({"lib/arm64-v8a/libnative-app.so": b"\x7fELF" + b"\0" * 60}, **kw)


def policy_text(spec: AppSpec) -> str | None:
    if spec.policy == "none":
        return None
    if spec.policy == "short":
        return (f"Privacy\nWe respect your privacy. We collect your email address to run the service. "
                f"Contact us with questions. This notice applies to {spec.name}.")
    subject = f"{spec.name}, a virtual reality game" if spec.vr_terms else "our software"
    parts = [
        f"This privacy policy describes how we handle information when you use {subject}. "
        "Please read it carefully before using the service.",
    ]
    collect = ["Information We Collect",
               "When you create an account, we collect your email address and username."]
    if spec.declared:
        phrases = " and ".join(POLICY_PHRASE[d] for d in spec.declared)
        collect.append(f"During play we collect {phrases} data so that your avatar moves naturally.")
    if spec.vague:
        collect.append("We may also collect biometric data from the headset sensors.")
    parts.append(collect[0] + "\n" + " ".join(collect[1:]))
    parts += [
        "How We Use Your Information\nWe use the information to provide and maintain the service, "
        "to respond to support requests and to fix bugs.",
        "Sharing of Information\nWe do not sell your personal data. We share information with hosting "
        "providers that operate servers on our behalf.",
        "Security\nWe protect stored information with encryption and strict access controls.",
        "Data Retention\nWe retain account information for as long as your account is active.",
    ]
    if spec.children_age is not None:
        parts.append(f"Children's Privacy\nThe service is not directed to children. We do not knowingly "
                     f"allow anyone under {spec.children_age} years of age to register.")
    parts.append("Contact Us\nIf you have any questions about this policy, email privacy@synthetic.example.")
    return "\n\n".join(parts) + "\n"


def expected(spec: AppSpec) -> dict:
    """Ground truth for one app, derived from its AppSpec alone."""
    status = spec.status()
    accesses = spec.effective_accesses() if status == "Complete" else []
    return {
        "app_id": spec.app_id, "store": spec.store, "category": spec.category,
        "engine_family": {"unreal": "Unreal", "unreal_encrypted": "Unreal", "il2cpp": "Unity",
                          "il2cpp_no_metadata": "Unity", "mono": "Unity"}.get(spec.engine, "Other"),
        "status": status,
        "accesses": accesses,
        "declared": [] if spec.policy != "long" else sorted(spec.declared),
        "vague": spec.vague and spec.policy == "long",
        "validity": {"long": "Valid", "short": "TooShort", "none": "Missing"}[spec.policy],
        "vr_specific": spec.policy == "long" and spec.vr_terms or spec.policy == "short",
        "children_age": spec.children_age if spec.policy == "long" else None,
        "has_children_section": spec.policy == "long" and spec.children_age is not None,
        "age_rating": spec.age_rating,
    }


def write_corpus(specs: list[AppSpec], out: str | Path) -> Path:
    out = Path(out)
    (out / "apks").mkdir(parents=True, exist_ok=True)
    (out / "policies").mkdir(parents=True, exist_ok=True)
    for spec in specs:
        (out / "apks" / f"{spec.app_id}.apk").write_bytes(build_app(spec))
        text = policy_text(spec)
        if text is not None:
            (out / "policies" / f"{spec.app_id}.txt").write_text(text, encoding="utf-8")
    (out / "records.json").write_text(json.dumps([s.record() for s in specs], indent=2) + "\n", encoding="utf-8")
    (out / "expected.json").write_text(json.dumps([expected(s) for s in specs], indent=2) + "\n", encoding="utf-8")
    (out / "specs.json").write_text(json.dumps([asdict(s) for s in specs], indent=2) + "\n", encoding="utf-8")
    return out


def synthetic_specs(n: int = 20, seed: int = 7) -> list[AppSpec]:
    rng = random.Random(seed)
    specs = []
    for i in range(n):
        store = STORES[i % len(STORES)]
        engine = ENGINES[i % len(ENGINES)] if i < len(ENGINES) else rng.choice(ENGINES[:3] * 3 + ENGINES[3:])
        accesses = sorted(rng.sample(DATA_TYPES, rng.randint(0, 3)), key=DATA_TYPES.index)
        declared = sorted(d for d in DATA_TYPES if (d in accesses and rng.random() < 0.5) or rng.random() < 0.1)
        permissions = ["android.permission.INTERNET"] + rng.sample(
            ["android.permission.CAMERA", "android.permission.RECORD_AUDIO",
             "android.permission.READ_EXTERNAL_STORAGE", "com.oculus.permission.HAND_TRACKING",
             "com.picovr.permission.EYE_TRACKING"], rng.randint(0, 3))
        short = sorted({p.rsplit(".", 1)[-1] for p in permissions})
        specs.append(AppSpec(
            app_id=f"app{i:02d}",
            store=store,
            name=f"Synthetic Title {i:02d}",
            engine=engine,
            accesses=accesses,
            declared=declared,
            vague=rng.random() < 0.3,
            policy=rng.choice(["long", "long", "long", "short", "none"]),
            vr_terms=rng.random() < 0.7,
            children_age=rng.choice([None, None, 13, 16, 11]),
            age_rating=rng.choice(["all", 13, 16, None]),
            category=rng.choice(CATEGORIES),
            permissions=permissions,
            declared_permissions=rng.sample(short, max(0, len(short) - 1)) if store == "Oculus" else None,
            policy_url=f"https://synthetic.example/{i:02d}/en/privacy",
            supported_languages=["English"],
        ))
    return specs


def golden_specs() -> list[AppSpec]:
    return [
        AppSpec("golden-eye", "Pico", "Eye Quest", "unreal", accesses=["Body", "Eye"], declared=["Eye"],
                children_age=13, age_rating=13, category="Game",
                permissions=["android.permission.CAMERA", "com.picovr.permission.EYE_TRACKING"],
                declared_permissions=["CAMERA"]),
        AppSpec("golden-hand", "Pico", "Hand Garden", "il2cpp", accesses=["Hand"], vague=True,
                age_rating="all", category="Education",
                permissions=["android.permission.INTERNET", "com.oculus.permission.HAND_TRACKING"]),
        AppSpec("golden-short", "Oculus", "Face Club", "mono", accesses=["Face"], policy="short",
                age_rating=13, category="Social",
                permissions=["android.permission.INTERNET", "com.oculus.permission.FACE_TRACKING"],
                declared_permissions=["FACE_TRACKING"]),
    ]


# findings the golden corpus must produce, worked out by hand from golden_specs()
GOLDEN_FINDINGS = {
    "golden-eye": ["F_PERM_DISCREPANCY", "F_BEHAVIOR_UNDECLARED"],
    "golden-hand": ["F_CROSS_PLATFORM_PERM", "F_CHILD_INCONSISTENCY", "F_BEHAVIOR_VAGUE"],
    "golden-short": ["F_BEHAVIOR_UNDECLARED", "F_POLICY_INVALID"],
}
