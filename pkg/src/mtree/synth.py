"""Random topologies and trees for property checks and experiments."""

from __future__ import annotations

import random
from typing import Optional, Sequence

from mtree.core import MeasurementTree, Path, build_tree
from mtree.summary import MONOTONE_NAMES


def _split(rng: random.Random, n: int, k: int) -> list[int]:
    cuts = sorted(rng.sample(range(1, n), k - 1))
    return [b - a for a, b in zip([0] + cuts, cuts + [n])]


def random_topology(
    rng: random.Random, max_depth: int = 5, max_leaves: int = 32, max_children: int = 4
) -> dict:
    """A random rooted topology record with at most ``max_depth`` levels."""
    if max_depth < 2:
        raise ValueError("a tree needs at least two levels")

    def make(label: str, n: int, level: int, force_internal: bool = False) -> dict:
        if level == max_depth:
            return {"label": label}
        if n == 1 and not force_internal and rng.random() < 0.6:
            return {"label": label}
        if level == max_depth - 1 or n == 1:
            parts = [1] * n
        else:
            parts = _split(rng, n, rng.randint(2, min(max_children, n)))
        return {
            "label": label,
            "children": [make(f"{label}.{i}", p, level + 1) for i, p in enumerate(parts)],
        }

    return make("r", rng.randint(1, max_leaves), 1, force_internal=True)


def topology_paths(topology: dict) -> tuple[list[Path], list[Path]]:
    """``(internal paths, leaf paths)`` in pre-order."""
    internal, leaves = [], []

    def walk(rec, path):
        if "children" in rec:
            internal.append(path)
            for c in rec["children"]:
                walk(c, path + (c["label"],))
        else:
            leaves.append(path)

    walk(topology, ())
    return internal, leaves


def random_functions(
    rng: random.Random, topology: dict, names: Sequence[str] = MONOTONE_NAMES
) -> dict:
    """Pick a function per internal node; gives ``weighted_mean`` nodes random child weights.

    Mutates ``topology`` to record the weights.
    """
    out = {}

    def walk(rec, path):
        if "children" not in rec:
            return
        name = rng.choice(list(names))
        out[path] = name
        for c in rec["children"]:
            if name == "weighted_mean":
                c["weight"] = round(rng.uniform(0.1, 3.0), 3)
            else:
                c.pop("weight", None)
            walk(c, path + (c["label"],))

    walk(topology, ())
    return out


def random_leaves(
    rng: random.Random, leaves: Sequence[Path], low: float = 0.0, high: float = 10.0,
    missing_rate: float = 0.0,
) -> dict:
    return {
        p: (None if rng.random() < missing_rate else rng.uniform(low, high)) for p in leaves
    }


def random_tree(
    rng: random.Random,
    max_depth: int = 5,
    max_leaves: int = 32,
    names: Sequence[str] = MONOTONE_NAMES,
    missing_rate: float = 0.0,
    topology: Optional[dict] = None,
) -> MeasurementTree:
    topology = topology or random_topology(rng, max_depth, max_leaves)
    functions = random_functions(rng, topology, names)
    _, leaves = topology_paths(topology)
    return build_tree(topology, random_leaves(rng, leaves, missing_rate=missing_rate), functions)


def dominating_family(
    rng: random.Random,
    topology: dict,
    functions: dict,
    size: int,
    bumps: int = 6,
) -> list[MeasurementTree]:
    """Trees over one topology whose leaf vectors often dominate each other.

    Each tree's leaves are a shared base plus a random subset of nonnegative
    bump vectors, so subset inclusion gives leafwise dominance; a few trees
    get independent noise to create incomparable pairs.
    """
    _, leaves = topology_paths(topology)
    base = [rng.uniform(0, 5) for _ in leaves]
    vecs = [[rng.choice((0.0, 0.0, rng.uniform(0, 2))) for _ in leaves] for _ in range(bumps)]
    out = []
    for _ in range(size):
        vals = list(base)
        if rng.random() < 0.1:
            vals = [v + rng.uniform(-1, 1) for v in vals]
        else:
            for vec in vecs:
                if rng.random() < 0.5:
                    vals = [v + b for v, b in zip(vals, vec)]
        out.append(build_tree(topology, dict(zip(leaves, vals)), functions))
    return out
