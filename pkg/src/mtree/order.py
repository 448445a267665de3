"""Equality, node-wise dominance, and partial orders over measurement trees.

Two trees are comparable only when they share topology and the same
order-inducing summary function at every internal node. ``a ≤ b`` then holds
when every compared node's value in ``a`` is at most its value in ``b``.
Equality (:func:`trees_equal`) looks at internal nodes only, so trees built
from different data can be equal; :func:`compare` defaults to all nodes,
leaves included. Both scopes are available on both sides.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

from mtree.core import EvaluatedTree, MeasurementTree, Path, format_path
from mtree.errors import IncompatibleTrees
from mtree.values import compare_values

SCOPES = ("all", "non-leaf")


class Outcome(str, Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    INCOMPARABLE = "incomparable"


class Relation(str, Enum):
    EQUAL = "="
    LESS_EQ = "≤"
    GREATER_EQ = "≥"
    INCOMPARABLE = "∥"

    @property
    def converse(self) -> "Relation":
        return _CONVERSE[self]

    @property
    def leq(self) -> bool:
        return self in (Relation.EQUAL, Relation.LESS_EQ)


_CONVERSE = {
    Relation.EQUAL: Relation.EQUAL,
    Relation.LESS_EQ: Relation.GREATER_EQ,
    Relation.GREATER_EQ: Relation.LESS_EQ,
    Relation.INCOMPARABLE: Relation.INCOMPARABLE,
}


@dataclass(frozen=True)
class CompatibilityReport:
    ok: bool
    reasons: tuple[str, ...] = ()

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class ComparisonReport:
    overall: Relation
    per_node: dict[Path, Outcome]
    scope: str
    precondition: CompatibilityReport = field(default_factory=lambda: CompatibilityReport(True))

    @property
    def precondition_ok(self) -> bool:
        return self.precondition.ok

    def divergences(self) -> dict[Path, Outcome]:
        return {p: o for p, o in self.per_node.items() if o is not Outcome.EQUAL}


@dataclass(frozen=True)
class EqualityReport:
    equal: bool
    per_node: dict[Path, bool]
    reasons: tuple[str, ...] = ()

    def __bool__(self):
        return self.equal


def _tree(t: Union[MeasurementTree, EvaluatedTree]) -> MeasurementTree:
    return t.tree if isinstance(t, EvaluatedTree) else t


def check_order_compatible(
    a: Union[MeasurementTree, EvaluatedTree], b: Union[MeasurementTree, EvaluatedTree]
) -> CompatibilityReport:
    """Same topology, same function assignment, and every function order-inducing."""
    ta, tb = _tree(a), _tree(b)
    if ta.order_signature == tb.order_signature and all(
        ordering for _, _, _, ordering in ta.order_signature[2]
    ):
        return CompatibilityReport(True)
    reasons: list[str] = []
    if ta.shape() != tb.shape():
        pa, pb = set(ta.paths), set(tb.paths)
        for p in sorted(pa - pb):
            reasons.append(f"topology mismatch: {format_path(p)} only in first tree")
        for p in sorted(pb - pa):
            reasons.append(f"topology mismatch: {format_path(p)} only in second tree")
        if pa == pb:
            reasons.append("topology mismatch: sibling order or node kinds differ")
        return CompatibilityReport(False, tuple(reasons))
    if ta.leaf_sets() != tb.leaf_sets():
        reasons.append("topology mismatch: leaves stand for different data elements")

    for p in ta.internal_paths():
        na, nb = ta.node(p), tb.node(p)
        fa, fb = na.function, nb.function
        if fa.assignment() != fb.assignment():
            reasons.append(f"function mismatch at {format_path(p)}: {fa.name} vs {fb.name}")
        elif na.weights != nb.weights:
            reasons.append(f"function mismatch at {format_path(p)}: edge weights differ")
        for f in {fa.name: fa, fb.name: fb}.values():
            if not f.induces_ordering:
                reasons.append(f"non-ordering function {f.name} at {format_path(p)}")
    return CompatibilityReport(not reasons, tuple(reasons))


def trees_equal(a: EvaluatedTree, b: EvaluatedTree) -> EqualityReport:
    """Equal topology, functions, and internal-node values; leaf data is ignored."""
    pre = check_order_compatible(a, b)
    # non-ordering functions do not matter for equality
    reasons = tuple(r for r in pre.reasons if not r.startswith("non-ordering"))
    if reasons:
        return EqualityReport(False, {}, reasons)
    per_node = {p: a.values[p] == b.values[p] for p in a.tree.internal_paths()}
    unequal = tuple(f"value differs at {format_path(p)}" for p, ok in per_node.items() if not ok)
    return EqualityReport(not unequal, per_node, unequal)


def compare(a: EvaluatedTree, b: EvaluatedTree, scope: str = "all") -> ComparisonReport:
    """Node-wise comparison of two order-compatible evaluated trees.

    ``scope="all"`` compares every node including leaf observations;
    ``scope="non-leaf"`` compares internal nodes only. Raises
    :class:`IncompatibleTrees` when the trees cannot be compared at all.
    An incomparable result is an answer, not an error.
    """
    if scope not in SCOPES:
        raise ValueError(f"scope must be one of {SCOPES}, got {scope!r}")
    pre = check_order_compatible(a, b)
    if not pre:
        raise IncompatibleTrees(pre.reasons)
    paths = a.tree.paths if scope == "all" else a.tree.internal_paths()
    per_node = {p: Outcome(compare_values(a.values[p], b.values[p])) for p in paths}
    return ComparisonReport(_overall(per_node.values()), per_node, scope, pre)


def _overall(outcomes) -> Relation:
    seen = set(outcomes)
    if seen <= {Outcome.EQUAL}:
        return Relation.EQUAL
    if seen <= {Outcome.LESS, Outcome.EQUAL}:
        return Relation.LESS_EQ
    if seen <= {Outcome.GREATER, Outcome.EQUAL}:
        return Relation.GREATER_EQ
    return Relation.INCOMPARABLE


def leq(a: EvaluatedTree, b: EvaluatedTree, scope: str = "all") -> bool:
    return compare(a, b, scope).overall.leq


@dataclass
class AxiomReport:
    reflexive: bool = True
    antisymmetric: bool = True
    transitive: bool = True
    converse_consistent: bool = True
    counterexamples: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)
    trees_checked: int = 0
    pairs_checked: int = 0
    triples_checked: int = 0
    # triples where the premise x ≤ y ≤ z actually held
    chains_checked: int = 0

    @property
    def ok(self) -> bool:
        return self.reflexive and self.antisymmetric and self.transitive and self.converse_consistent

    def lines(self) -> list[str]:
        def mark(flag):
            return "ok" if flag else "FAILED"

        return [
            f"reflexivity: {mark(self.reflexive)} ({self.trees_checked} trees)",
            f"antisymmetry: {mark(self.antisymmetric)} ({self.pairs_checked} pairs)",
            f"transitivity: {mark(self.transitive)} "
            f"({self.triples_checked} triples, {self.chains_checked} chains)",
        ] + [f"counterexample {kind}: {idx}" for kind, idx in self.counterexamples]


class _Relations:
    """Lazy cache of pairwise comparisons."""

    def __init__(self, trees: Sequence[EvaluatedTree], scope: str):
        self.trees = trees
        self.scope = scope
        self._cache: dict[tuple[int, int], Relation] = {}

    def __call__(self, i: int, j: int) -> Relation:
        key = (i, j)
        if key not in self._cache:
            self._cache[key] = compare(self.trees[i], self.trees[j], self.scope).overall
        return self._cache[key]


def _scoped_equal(a: EvaluatedTree, b: EvaluatedTree, scope: str) -> bool:
    if not trees_equal(a, b):
        return False
    if scope == "all":
        return all(a.values[p] == b.values[p] for p in a.tree.leaves())
    return True


def verify_poset_axioms(
    trees: Sequence[EvaluatedTree],
    scope: str = "all",
    samples: Optional[int] = None,
    seed: int = 0,
    _rel: Optional[_Relations] = None,
) -> AxiomReport:
    """Check reflexivity, antisymmetry, and transitivity of ≤ on ``trees``.

    Every pair and ordered triple is checked when ``samples`` is None;
    otherwise ``samples`` random triples (and the pairs inside them) are
    drawn with a seeded RNG. Each direction ``x ≤ y`` and ``y ≤ x`` is an
    independent :func:`compare` call, so the converse relation is checked
    rather than assumed.
    """
    rel = _rel or _Relations(trees, scope)
    report = AxiomReport()
    n = len(trees)

    for i in range(n):
        report.trees_checked += 1
        if rel(i, i) is not Relation.EQUAL:
            report.reflexive = False
            report.counterexamples.append(("reflexivity", (i,)))

    if samples is None:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        triples = [(i, j, k) for i in range(n) for j in range(n) for k in range(n)]
    else:
        rng = random.Random(seed)
        triples = [tuple(rng.randrange(n) for _ in range(3)) for _ in range(samples)] if n else []
        pairs = sorted({tuple(sorted(t[a:a + 2])) for t in triples for a in (0, 1)})
        pairs = [p for p in pairs if p[0] != p[1]]

    for i, j in pairs:
        report.pairs_checked += 1
        if rel(i, j).converse is not rel(j, i):
            report.converse_consistent = False
            report.counterexamples.append(("converse", (i, j)))
        if rel(i, j).leq and rel(j, i).leq and not _scoped_equal(trees[i], trees[j], scope):
            report.antisymmetric = False
            report.counterexamples.append(("antisymmetry", (i, j)))

    for i, j, k in triples:
        report.triples_checked += 1
        if rel(i, j).leq and rel(j, k).leq:
            report.chains_checked += 1
            if not rel(i, k).leq:
                report.transitive = False
                report.counterexamples.append(("transitivity", (i, j, k)))
    return report


@dataclass
class PosetResult:
    relation: list[list[Relation]]
    hasse_edges: list[tuple[int, int]]
    axiom_report: AxiomReport

    def incomparable_pairs(self) -> list[tuple[int, int]]:
        n = len(self.relation)
        return [
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if self.relation[i][j] is Relation.INCOMPARABLE
        ]


def hasse_edges(relation: Sequence[Sequence[Relation]]) -> list[tuple[int, int]]:
    """Covering pairs ``(lower, upper)``: strict ≤ with nothing strictly between."""
    n = len(relation)

    def lt(i, j):
        return relation[i][j] is Relation.LESS_EQ

    edges = []
    for i in range(n):
        for j in range(n):
            if lt(i, j) and not any(lt(i, k) and lt(k, j) for k in range(n)):
                edges.append((i, j))
    return edges


def poset(trees: Sequence[EvaluatedTree], scope: str = "all") -> PosetResult:
    """Full pairwise relation matrix, Hasse diagram, and axiom check for a set of trees."""
    rel = _Relations(trees, scope)
    n = len(trees)
    matrix = [[rel(i, j) for j in range(n)] for i in range(n)]
    report = verify_poset_axioms(trees, scope, _rel=rel)
    return PosetResult(matrix, hasse_edges(matrix), report)
