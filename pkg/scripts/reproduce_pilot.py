"""Rebuild the three pilot CoRIx trees from their Level-4 scores and print
every Level 1-3 aggregate next to the published value.

    python scripts/reproduce_pilot.py [--policy skip|zero|propagate]
"""

import argparse
import os
import sys

from mtree.catalog import PILOT_MODELS, corix_from_level4, pilot_level4
from mtree.core import format_path
from mtree.values import MISSING, format_value

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests"))
from pilot_scores import LEVEL123, matches  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--policy", default="skip", choices=("skip", "zero", "propagate"))
    args = ap.parse_args()
    misses = 0
    for model, task in PILOT_MODELS.items():
        ev = corix_from_level4(pilot_level4(model), args.policy)
        print(f"Model {model} ({task})")
        for path, want in LEVEL123[model].items():
            v = ev.values[path]
            ok = v is not MISSING and matches(v.value, want)
            misses += not ok
            print(f"  {format_path(path):<18} {format_value(v):>6}  published {want:.2f}  {'ok' if ok else 'MISS'}")
    print(f"{misses} of 27 outside tolerance")
    sys.exit(1 if misses else 0)


if __name__ == "__main__":
    main()
