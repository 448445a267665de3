"""Measurement-tree data model, hierarchical-clustering validation, evaluation.

Nodes are addressed by label path: the tuple of labels from the root down,
excluding the root's own label, so the root is ``()``. Every leaf stands for
one element of the dataset (its ``datum``, defaulting to its path); an
internal node stands for the set of elements below it and carries the summary
function applied to its direct children.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Any, Hashable, Iterator, Mapping, Optional, Sequence, Union

from mtree.errors import (
    DuplicateSiblingLabel,
    EmptyInternalNode,
    EvaluationFailed,
    FunctionDomainMismatch,
    MissingFunctionBinding,
    MissingLeafBinding,
    NonPositiveWeight,
    TreeError,
    UnknownFunction,
    UnknownNode,
    ValidationFailed,
)
from mtree.summary import DEFAULT_REGISTRY, MISSING_POLICIES, Registry, SummaryFunctionSpec
from mtree.values import MISSING, Value, as_value

log = logging.getLogger(__name__)

Path = tuple[str, ...]
PATH_SEP = "/"


def parse_path(path: Union[str, Sequence[str]]) -> Path:
    """``"FT/annotation"`` → ``("FT", "annotation")``; ``""`` is the root."""
    if isinstance(path, str):
        return tuple(p for p in path.split(PATH_SEP) if p)
    return tuple(path)


def format_path(path: Path) -> str:
    return PATH_SEP.join(path) if path else PATH_SEP


@dataclass(frozen=True)
class Node:
    """A tree node. Leaves have ``function is None``."""

    label: str
    children: tuple["Node", ...] = ()
    weights: tuple[float, ...] = ()
    function: Optional[SummaryFunctionSpec] = None
    observation: Value = MISSING
    datum: Optional[Hashable] = None

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if self.function is not None and not self.weights:
            object.__setattr__(self, "weights", (1.0,) * len(self.children))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "observation", as_value(self.observation))

    @property
    def is_leaf(self) -> bool:
        return self.function is None


def leaf(label: str, value: Any = None, datum: Optional[Hashable] = None) -> Node:
    return Node(label, observation=as_value(value), datum=datum)


def internal(
    label: str,
    function: Union[str, SummaryFunctionSpec],
    children: Sequence[Node],
    weights: Optional[Sequence[float]] = None,
    params: Optional[Mapping[str, Any]] = None,
    registry: Optional[Registry] = None,
) -> Node:
    if isinstance(function, str):
        function = (registry or DEFAULT_REGISTRY).spec(function, params)
    return Node(label, tuple(children), tuple(weights or ()), function)


# -- hierarchical-clustering validation -----------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str  # "overlap" | "incomplete_partition" | "root_coverage"
    nodes: tuple[Path, ...]
    detail: str

    def __str__(self):
        where = ", ".join(format_path(p) for p in self.nodes)
        return f"{self.kind} at {where}: {self.detail}"


VIOLATION_KINDS = ("overlap", "incomplete_partition", "root_coverage")


@dataclass
class Candidate:
    """Unvalidated node structure, as produced by permissive parsing.

    ``members`` optionally declares an internal node's element set outright;
    otherwise it is the union of its children's sets.
    """

    label: str
    children: list["Candidate"] = field(default_factory=list)
    datum: Optional[Hashable] = None
    members: Optional[frozenset] = None


def _element_sets(root) -> tuple[dict[Path, frozenset], dict[Path, list[Path]]]:
    sets: dict[Path, frozenset] = {}
    kids: dict[Path, list[Path]] = {}

    def walk(node, path: Path) -> frozenset:
        child_paths = [path + (c.label,) for c in node.children]
        kids[path] = child_paths
        if node.children:
            union = frozenset().union(*(walk(c, p) for c, p in zip(node.children, child_paths)))
        else:
            union = frozenset({path if node.datum is None else node.datum})
        declared = getattr(node, "members", None)
        sets[path] = frozenset(declared) if declared is not None else union
        return sets[path]

    walk(root, ())
    return sets, kids


def validate_laminar(structure, universe: Optional[frozenset] = None) -> list[Violation]:
    """Report every way a node structure fails to be a hierarchical clustering.

    ``structure`` is a :class:`MeasurementTree`, a :class:`Node`, or a
    :class:`Candidate`. Violations come in three kinds: two node sets that
    intersect without nesting (``overlap``), an internal node whose children
    are not a disjoint cover of its set (``incomplete_partition``), and a root
    that does not cover exactly ``universe`` (``root_coverage``). An empty
    list means the structure is valid.
    """
    if isinstance(structure, MeasurementTree):
        if universe is None:
            universe = structure.universe
        structure = structure.root
    sets, kids = _element_sets(structure)
    out: list[Violation] = []

    # Sets containing a common element must form a chain; checking each
    # consecutive pair in size order finds a failure whenever one exists.
    holders: dict[Hashable, list[Path]] = {}
    for path, s in sets.items():
        for x in s:
            holders.setdefault(x, []).append(path)
    seen: set[tuple[Path, Path]] = set()
    for x in sorted(holders, key=repr):
        chain = sorted(holders[x], key=lambda p: (-len(sets[p]), len(p), p))
        for big, small in zip(chain, chain[1:]):
            if sets[small] <= sets[big]:
                continue
            pair = tuple(sorted((big, small)))
            if pair in seen:
                continue
            seen.add(pair)
            out.append(
                Violation(
                    "overlap",
                    pair,
                    f"sets share {x!r} but neither contains the other",
                )
            )

    for path, children in kids.items():
        if not children:
            continue
        child_sets = [sets[c] for c in children]
        union = frozenset().union(*child_sets)
        if sum(len(s) for s in child_sets) != len(union):
            out.append(Violation("incomplete_partition", (path,), "children overlap"))
        if union != sets[path]:
            extra = sorted(map(repr, sets[path] - union))
            lost = sorted(map(repr, union - sets[path]))
            detail = []
            if extra:
                detail.append("not covered by children: " + ", ".join(extra))
            if lost:
                detail.append("children cover outside elements: " + ", ".join(lost))
            out.append(Violation("incomplete_partition", (path,), "; ".join(detail)))

    if universe is not None and sets[()] != frozenset(universe):
        uncovered = sorted(map(repr, frozenset(universe) - sets[()]))
        foreign = sorted(map(repr, sets[()] - frozenset(universe)))
        detail = []
        if uncovered:
            detail.append(f"root misses {len(uncovered)} of {len(universe)} elements: " + ", ".join(uncovered))
        if foreign:
            detail.append("root holds elements outside the dataset: " + ", ".join(foreign))
        out.append(Violation("root_coverage", ((),), "; ".join(detail)))
    return out


# -- trees ------------------------------------------------------------------

def _check_structure(node: Node, path: Path) -> None:
    if node.is_leaf:
        if node.children:
            raise TreeError(f"leaf {format_path(path)!r} has children but no function")
        return
    if not node.children:
        raise EmptyInternalNode(path)
    if len(node.weights) != len(node.children):
        raise TreeError(
            f"{format_path(path)!r}: {len(node.weights)} weights for {len(node.children)} children"
        )
    labels = set()
    for child, w in zip(node.children, node.weights):
        if child.label in labels:
            raise DuplicateSiblingLabel(path, child.label)
        labels.add(child.label)
        if not w > 0:
            raise NonPositiveWeight(path + (child.label,), w)
    if not node.function.weight_aware and any(w != 1.0 for w in node.weights):
        log.warning(
            "%s ignores edge weights at %s", node.function.name, format_path(path)
        )
    for child in node.children:
        _check_structure(child, path + (child.label,))


@dataclass(frozen=True)
class MeasurementTree:
    """A validated hierarchical clustering with a summary function per internal node.

    ``universe``, when given, is the declared dataset the root must cover.
    """

    root: Node
    missing_policy: str = "skip"
    universe: Optional[frozenset] = None
    _index: Mapping[Path, Node] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.missing_policy not in MISSING_POLICIES:
            raise ValueError(f"unknown missing policy {self.missing_policy!r}")
        if self.universe is not None:
            object.__setattr__(self, "universe", frozenset(self.universe))
        _check_structure(self.root, ())
        violations = validate_laminar(self.root, self.universe)
        if violations:
            raise ValidationFailed(violations)
        index: dict[Path, Node] = {}

        def walk(node: Node, path: Path):
            index[path] = node
            for c in node.children:
                walk(c, path + (c.label,))

        walk(self.root, ())
        object.__setattr__(self, "_index", MappingProxyType(index))

    @property
    def paths(self) -> list[Path]:
        """All node paths in pre-order (declaration order)."""
        return list(self._index)

    def node(self, path: Union[str, Sequence[str]]) -> Node:
        path = parse_path(path)
        try:
            return self._index[path]
        except KeyError:
            raise UnknownNode(path) from None

    def __contains__(self, path) -> bool:
        return parse_path(path) in self._index

    def leaves(self) -> list[Path]:
        return [p for p, n in self._index.items() if n.is_leaf]

    def internal_paths(self) -> list[Path]:
        return [p for p, n in self._index.items() if not n.is_leaf]

    @property
    def dataset_size(self) -> int:
        return len(self.leaves())

    @property
    def function_table(self) -> Mapping[Path, SummaryFunctionSpec]:
        return {p: n.function for p, n in self._index.items() if not n.is_leaf}

    @property
    def height(self) -> int:
        return max(len(p) for p in self._index)

    @cached_property
    def _sets(self) -> Mapping[Path, frozenset]:
        return MappingProxyType(_element_sets(self.root)[0])

    def leaf_sets(self) -> dict[Path, frozenset]:
        return dict(self._sets)

    @cached_property
    def _shape(self) -> tuple:
        return tuple((p, tuple(c.label for c in n.children)) for p, n in self._index.items())

    def shape(self) -> tuple:
        """Topology signature: paths with their child label order."""
        return self._shape

    @cached_property
    def order_signature(self) -> tuple:
        """Everything two trees must share to be compared node by node."""
        functions = tuple(
            (p, n.function.assignment(), n.weights, n.function.induces_ordering)
            for p, n in self._index.items()
            if not n.is_leaf
        )
        return (self._shape, tuple(sorted(self._sets.items())), functions)


def _lookup(mapping: Mapping, path: Path, default=KeyError):
    if path in mapping:
        return mapping[path]
    s = PATH_SEP.join(path)
    if s in mapping:
        return mapping[s]
    if default is KeyError:
        raise KeyError(path)
    return default


def build_tree(
    topology: Mapping[str, Any],
    leaf_data: Mapping,
    functions: Mapping,
    missing_policy: str = "skip",
    registry: Optional[Registry] = None,
) -> MeasurementTree:
    """Assemble a tree from a topology and per-path bindings.

    ``topology`` is a nested record ``{"label": ..., "children": [...],
    "weight": ...}``; records without ``children`` are leaves. ``leaf_data``
    maps every leaf path to its observation (``None``/``MISSING`` for absent
    data) and ``functions`` maps every internal path to a function name, a
    ``(name, params)`` pair, or a :class:`SummaryFunctionSpec`. Paths are
    label tuples below the root or their ``"a/b"`` string form.
    """
    registry = registry or DEFAULT_REGISTRY

    def resolve(binding) -> SummaryFunctionSpec:
        if isinstance(binding, SummaryFunctionSpec):
            return binding
        if isinstance(binding, str):
            return registry.spec(binding)
        name, params = binding
        return registry.spec(name, params)

    def make(rec: Mapping[str, Any], path: Path) -> Node:
        children = rec.get("children")
        if children is None:
            if _lookup(functions, path, None) is not None and path:
                raise TreeError(f"function bound to leaf {format_path(path)!r}")
            try:
                value = _lookup(leaf_data, path)
            except KeyError:
                raise MissingLeafBinding(path) from None
            return leaf(rec["label"], value, rec.get("datum"))
        if not children:
            raise EmptyInternalNode(path)
        labels = [c["label"] for c in children]
        for i, lab in enumerate(labels):
            if lab in labels[:i]:
                raise DuplicateSiblingLabel(path, lab)
        weights = []
        for c in children:
            w = float(c.get("weight", 1.0))
            if not w > 0:
                raise NonPositiveWeight(path + (c["label"],), w)
            weights.append(w)
        binding = _lookup(functions, path, None)
        if binding is None:
            raise MissingFunctionBinding(path)
        kids = [make(c, path + (c["label"],)) for c in children]
        return Node(rec["label"], tuple(kids), tuple(weights), resolve(binding))

    return MeasurementTree(make(topology, ()), missing_policy)


# -- evaluation -------------------------------------------------------------

@dataclass(frozen=True)
class EvaluatedTree:
    tree: MeasurementTree
    values: Mapping[Path, Value]

    def __post_init__(self):
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))

    @property
    def root_value(self) -> Value:
        return self.values[()]

    def value(self, path) -> Value:
        return node_value(self, path)

    def __eq__(self, other):
        if not isinstance(other, EvaluatedTree):
            return NotImplemented
        return self.tree == other.tree and dict(self.values) == dict(other.values)

    __hash__ = None


def evaluate(tree: MeasurementTree, registry: Optional[Registry] = None) -> EvaluatedTree:
    """Summarize bottom-up: each internal value is its function applied to its children's values."""
    registry = registry or DEFAULT_REGISTRY
    values: dict[Path, Value] = {}

    def visit(node: Node, path: Path) -> Value:
        if node.is_leaf:
            values[path] = node.observation
            return node.observation
        child_values = [visit(c, path + (c.label,)) for c in node.children]
        try:
            out = registry.apply(node.function, child_values, node.weights, tree.missing_policy)
        except (FunctionDomainMismatch, UnknownFunction) as exc:
            exc.path = path
            raise
        except Exception as exc:  # impls are user code
            raise EvaluationFailed(path, exc) from exc
        values[path] = out
        return out

    visit(tree.root, ())
    # pre-order, matching tree.paths
    return EvaluatedTree(tree, {p: values[p] for p in tree.paths})


def node_value(evaluated: EvaluatedTree, path) -> Value:
    path = parse_path(path)
    try:
        return evaluated.values[path]
    except KeyError:
        raise UnknownNode(path) from None


def subtree(tree: MeasurementTree, path) -> MeasurementTree:
    """The tree rooted at ``path``, as an independent measurement tree."""
    node = tree.node(path)
    return MeasurementTree(node, tree.missing_policy)


def prune_depth(evaluated: EvaluatedTree, depth: int) -> EvaluatedTree:
    """Drop nodes deeper than ``depth``.

    Internal nodes at exactly ``depth`` become leaves holding their
    already-computed values; nothing is re-aggregated.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")

    def cut(node: Node, path: Path) -> Node:
        if node.is_leaf:
            return node
        if len(path) >= depth:
            return Node(node.label, observation=evaluated.values[path])
        return Node(
            node.label,
            tuple(cut(c, path + (c.label,)) for c in node.children),
            node.weights,
            node.function,
        )

    src = evaluated.tree
    if depth >= src.height:
        return evaluated
    pruned = MeasurementTree(cut(src.root, ()), src.missing_policy)
    return EvaluatedTree(pruned, {p: evaluated.values[p] for p in pruned.paths})


def walk(node: Node, path: Path = ()) -> Iterator[tuple[Path, Node]]:
    yield path, node
    for c in node.children:
        yield from walk(c, path + (c.label,))

