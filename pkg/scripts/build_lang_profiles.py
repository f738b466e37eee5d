"""Rebuild src/vrprivacy/data/lang_profiles.json from the sample texts in data/lang/."""

import json
from pathlib import Path

from vrprivacy.policy.langdetect import LANGUAGES, ranked_profile

DATA = Path(__file__).resolve().parents[1] / "src" / "vrprivacy" / "data"


def build() -> dict[str, list[str]]:
    return {lang: ranked_profile((DATA / "lang" / f"{lang}.txt").read_text("utf-8")) for lang in LANGUAGES}


if __name__ == "__main__":
    out = DATA / "lang_profiles.json"
    out.write_text(json.dumps(build(), ensure_ascii=False, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {out}")
