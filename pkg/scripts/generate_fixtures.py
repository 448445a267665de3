"""Regenerate the bundled example documents under src/mtree/fixtures/.

Tree documents are written evaluated, so each carries its computed values.

    python scripts/generate_fixtures.py [--check]

With --check nothing is written; the script exits 1 if any bundled file
differs from what it would generate.
"""

import argparse
import csv
import io
import os
import random
import sys

from mtree.catalog import (
    CORIX_COLOR_THRESHOLDS,
    CORIX_ITEMS,
    HELM_SUBCONSTRUCTS,
    PILOT_MODELS,
    accuracy_tree,
    corix_level4_tree,
    helm_tree,
    pilot_level4,
    two_construct_tree,
)
from mtree.core import evaluate
from mtree.io import SIGNAL_COLUMNS, write_tree_file

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "..", "src", "mtree", "fixtures")


def corix_docs():
    out = {}
    for model, task in PILOT_MODELS.items():
        tree = evaluate(corix_level4_tree(pilot_level4(model)))
        meta = {
            "instrument": "corix",
            "model": f"Model {model}",
            "task": task,
            "note": "Level-4 pilot scores bound as leaves; Level 5 withheld",
        }
        defaults = {"color_thresholds": list(CORIX_COLOR_THRESHOLDS)}
        out[f"corix_model_{model.lower()}.json"] = write_tree_file(tree, meta, defaults)
    return out


def helm_doc(seed=7, competitors=5):
    rng = random.Random(seed)
    scores, comp = {}, {}
    sub_comp = []
    for sub, scenarios in HELM_SUBCONSTRUCTS.items():
        rows = []
        for s in scenarios:
            scores[(sub, s)] = round(rng.uniform(0.3, 0.9), 3)
            rows.append([round(rng.uniform(0.2, 0.95), 3) for _ in range(competitors)])
        comp[(sub,)] = rows
        sub_comp.append([round(rng.uniform(0.0, 1.0), 3) for _ in range(competitors)])
    comp[()] = sub_comp
    tree = evaluate(helm_tree(scores, comp))
    meta = {"instrument": "helm", "synthetic": True, "note": "synthetic scores; topology only"}
    return write_tree_file(tree, meta)


def small_docs():
    return {
        "two_construct_mean.json": write_tree_file(evaluate(two_construct_tree("mean")), {"example": "arithmetic mean"}),
        "two_construct_max.json": write_tree_file(evaluate(two_construct_tree("max")), {"example": "maximum"}),
        "accuracy_example.json": write_tree_file(
            evaluate(accuracy_tree([1, 1, 0, 1])), {"example": "accuracy as a two-level tree", "synthetic": True}
        ),
    }


def synthetic_signals(model="A", spread=0.5):
    """Level-5 responses whose Level-4 summaries equal the published scores.

    Each item gets three responses v - d, v, v + d; both their mean and their
    median are v. Annotations are recorded on a 0-10 risk scale, perceptions
    on a 1-5 satisfaction scale (5 = most satisfied, lowest risk).
    """
    level4 = pilot_level4(model)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SIGNAL_COLUMNS)
    for (level, source), items in CORIX_ITEMS.items():
        for item in items:
            v = level4.get((level, source, item))
            if v is None:
                continue
            d = min(spread, v, 10 - v)
            for k, score in enumerate((v - d, v, v + d), start=1):
                session = f"{level}-{k:02d}"
                if source == "perception":
                    raw = 1 + 4 * (10 - score) / 10
                    w.writerow([session, item, level, source, f"{raw:.6f}", 1, 5, "lower_is_risk"])
                else:
                    w.writerow([session, item, level, source, f"{score:.6f}", 0, 10, "higher_is_risk"])
    return buf.getvalue().encode("utf-8")


def all_fixtures():
    files = {}
    files.update(corix_docs())
    files.update(small_docs())
    files["helm_topology.json"] = helm_doc()
    files["corix_model_a_signals.csv"] = synthetic_signals("A")
    return files


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args()
    stale = []
    for name, blob in sorted(all_fixtures().items()):
        path = os.path.join(FIXTURES, name)
        if args.check:
            try:
                with open(path, "rb") as f:
                    if f.read() != blob:
                        stale.append(name)
            except FileNotFoundError:
                stale.append(name)
            continue
        os.makedirs(FIXTURES, exist_ok=True)
        with open(path, "wb") as f:
            f.write(blob)
        print("wrote", os.path.relpath(path))
    if stale:
        print("stale fixtures:", ", ".join(stale))
        sys.exit(1)


if __name__ == "__main__":
    main()
