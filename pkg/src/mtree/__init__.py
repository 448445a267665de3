"""Measurement trees: hierarchical, interpretable metrics.

Leaves hold observations, each internal node summarizes its children with
its own summary function, and trees sharing topology and functions are
partially ordered by node-wise dominance.
"""

from mtree.core import (
    Candidate,
    EvaluatedTree,
    MeasurementTree,
    Node,
    Violation,
    build_tree,
    evaluate,
    internal,
    leaf,
    node_value,
    parse_path,
    prune_depth,
    subtree,
    validate_laminar,
)
from mtree.order import (
    ComparisonReport,
    Outcome,
    PosetResult,
    Relation,
    check_order_compatible,
    compare,
    poset,
    trees_equal,
    verify_poset_axioms,
)
from mtree.summary import (
    DEFAULT_REGISTRY,
    Registry,
    SummaryFunctionSpec,
    apply,
    builtin_catalog,
    default_registry,
)
from mtree.values import MISSING, Category, Number, Text, Vector, as_value

__version__ = "0.1.0"
