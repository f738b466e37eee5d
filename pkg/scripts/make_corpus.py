"""Write the synthetic audit corpora.

    python3 scripts/make_corpus.py OUT_DIR [--apps 20] [--seed 7] [--golden]
"""

import argparse

from vrprivacy.fixtures.corpus import golden_specs, synthetic_specs, write_corpus


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("out")
    p.add_argument("--apps", type=int, default=20)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--golden", action="store_true", help="write the 3-app golden corpus instead")
    args = p.parse_args()
    specs = golden_specs() if args.golden else synthetic_specs(args.apps, args.seed)
    out = write_corpus(specs, args.out)
    print(f"wrote {len(specs)} apps to {out}")


if __name__ == "__main__":
    main()
