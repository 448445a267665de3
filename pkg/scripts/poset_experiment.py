"""Sample order-compatible trees over one random topology and check the
partial-order axioms, reporting how often pairs turn out comparable.

    python scripts/poset_experiment.py --trees 1000 --triples 20000 --seed 0
"""

import argparse
import random
import time

from mtree.core import evaluate
from mtree.order import Relation, compare, verify_poset_axioms
from mtree.summary import MONOTONE_NAMES
from mtree.synth import dominating_family, random_functions, random_topology, topology_paths


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trees", type=int, default=1000)
    ap.add_argument("--triples", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--scope", default="all", choices=("all", "non-leaf"))
    args = ap.parse_args()

    rng = random.Random(args.seed)
    topo = random_topology(rng, max_depth=5, max_leaves=32)
    internal, leaves = topology_paths(topo)
    fns = random_functions(rng, topo, MONOTONE_NAMES)
    print(f"topology: {len(internal)} internal nodes, {len(leaves)} leaves")
    print("functions:", ", ".join(sorted(set(fns.values()))))

    start = time.perf_counter()
    trees = [evaluate(t) for t in dominating_family(rng, topo, fns, args.trees)]
    report = verify_poset_axioms(trees, args.scope, samples=args.triples, seed=args.seed)
    elapsed = time.perf_counter() - start
    for line in report.lines():
        print(line)

    sample = random.Random(args.seed + 1)

    counts = {r: 0 for r in Relation}
    for _ in range(2000):
        i, j = sample.randrange(len(trees)), sample.randrange(len(trees))
        counts[compare(trees[i], trees[j], args.scope).overall] += 1
    print("relation mix over 2000 random pairs:", ", ".join(f"{r.value} {n}" for r, n in counts.items()))
    print(f"elapsed {elapsed:.1f}s")


if __name__ == "__main__":
    main()
