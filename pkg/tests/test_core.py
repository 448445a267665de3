import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mtree.core import (
    Candidate,
    MeasurementTree,
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
from mtree.errors import (
    DuplicateSiblingLabel,
    EmptyInternalNode,
    EvaluationFailed,
    FunctionDomainMismatch,
    MissingFunctionBinding,
    MissingLeafBinding,
    NonPositiveWeight,
    ValidationFailed,
    UnknownNode,
)
from mtree.summary import SummaryFunctionSpec, builtin_catalog
from mtree.synth import random_functions, random_leaves, random_topology, topology_paths
from mtree.values import MISSING, Number, Text

import oracles

TWO_CONSTRUCTS = {
    "label": "measurand",
    "children": [
        {"label": "c1", "children": [{"label": "x1"}, {"label": "x2"}]},
        {"label": "c2", "children": [{"label": "x3"}, {"label": "x4"}]},
    ],
}
TWO_LEAVES = {"c1/x1": 1, "c1/x2": 3, "c2/x3": 2, "c2/x4": 2}


def two(fn):
    return build_tree(TWO_CONSTRUCTS, TWO_LEAVES, {(): fn, "c1": fn, "c2": fn})


# -- build_tree ---------------------------------------------------------------

def test_build_four_leaves_two_constructs():
    t = two("mean")
    assert t.dataset_size == 4
    assert t.height == 2
    assert [p for p in t.paths] == [(), ("c1",), ("c1", "x1"), ("c1", "x2"), ("c2",), ("c2", "x3"), ("c2", "x4")]
    assert set(t.function_table) == {(), ("c1",), ("c2",)}
    assert t.node("c1").weights == (1.0, 1.0)


def test_single_leaf_under_root():
    t = build_tree({"label": "r", "children": [{"label": "x"}]}, {"x": 4.5}, {(): "mean"})
    assert evaluate(t).root_value == Number(4.5)


def test_empty_internal_node():
    with pytest.raises(EmptyInternalNode):
        build_tree({"label": "r", "children": []}, {}, {(): "mean"})
    with pytest.raises(EmptyInternalNode):
        MeasurementTree(internal("r", "mean", []))


def test_build_errors():
    topo = {"label": "r", "children": [{"label": "a"}, {"label": "b"}]}
    with pytest.raises(MissingLeafBinding):
        build_tree(topo, {"a": 1}, {(): "mean"})
    with pytest.raises(MissingFunctionBinding):
        build_tree(topo, {"a": 1, "b": 2}, {})
    dup = {"label": "r", "children": [{"label": "a"}, {"label": "a"}]}
    with pytest.raises(DuplicateSiblingLabel):
        build_tree(dup, {"a": 1}, {(): "mean"})
    weighted = {"label": "r", "children": [{"label": "a", "weight": 0}, {"label": "b"}]}
    with pytest.raises(NonPositiveWeight):
        build_tree(weighted, {"a": 1, "b": 2}, {(): "weighted_mean"})


def test_explicit_missing_leaf_is_a_binding():
    topo = {"label": "r", "children": [{"label": "a"}, {"label": "b"}]}
    t = build_tree(topo, {"a": 1, "b": None}, {(): "mean"})
    ev = evaluate(t)
    assert ev.value("b") is MISSING
    assert ev.root_value == Number(1.0)


def test_duplicate_datum_is_not_a_clustering():
    root = internal("r", "mean", [leaf("a", 1, datum="x"), leaf("b", 2, datum="x")])
    with pytest.raises(ValidationFailed) as exc:
        MeasurementTree(root)
    assert {v.kind for v in exc.value.violations} == {"incomplete_partition"}


# -- validate_laminar -----------------------------------------------------------

def test_built_tree_is_valid():
    assert validate_laminar(two("mean")) == []


def test_shared_leaf_under_two_siblings_overlaps():
    cand = Candidate(
        "r",
        [
            Candidate("A", [Candidate("a1", datum="x1"), Candidate("a2", datum="x2")]),
            Candidate("B", [Candidate("b1", datum="x2"), Candidate("b2", datum="x3")]),
        ],
    )
    kinds = {v.kind for v in validate_laminar(cand)}
    assert "overlap" in kinds
    assert kinds == oracles.violation_kinds(cand)
    overlap = [v for v in validate_laminar(cand) if v.kind == "overlap"]
    assert overlap[0].nodes == (("A",), ("B",))


def test_root_covering_three_of_four():
    cand = Candidate("r", [Candidate(f"l{i}", datum=f"x{i}") for i in range(3)])
    violations = validate_laminar(cand, universe={"x0", "x1", "x2", "x3"})
    assert [v.kind for v in violations] == ["root_coverage"]
    assert "x3" in violations[0].detail


def test_declared_members_not_covered_by_children():
    cand = Candidate(
        "r",
        [Candidate("A", [Candidate("a", datum="x1")], members=frozenset({"x1", "x9"})), Candidate("b", datum="x2")],
    )
    kinds = {v.kind for v in validate_laminar(cand, universe={"x1", "x2", "x9"})}
    assert kinds == {"incomplete_partition"} == oracles.violation_kinds(cand, {"x1", "x2", "x9"})


@given(st.integers(0, 2**32 - 1))
def test_random_trees_are_laminar_by_oracle(seed):
    rng = random.Random(seed)
    topo = random_topology(rng)
    fns = random_functions(rng, topo)
    _, leaves = topology_paths(topo)
    t = build_tree(topo, random_leaves(rng, leaves), fns)
    sets = t.leaf_sets()
    assert oracles.violation_kinds(t.root) == set()
    for p in t.internal_paths():
        kids = [sets[p + (c.label,)] for c in t.node(p).children]
        assert frozenset().union(*kids) == sets[p]
        assert sum(map(len, kids)) == len(sets[p])
    assert sets[()] == frozenset(leaves)


# -- evaluate -------------------------------------------------------------------

def test_two_construct_mean_and_max():
    ev = evaluate(two("mean"))
    assert [ev.value(p).value for p in ["", "c1", "c2"]] == [2, 2, 2]
    ev = evaluate(two("max"))
    assert [ev.value(p).value for p in ["", "c1", "c2"]] == [3, 3, 2]


def test_leaves_pass_through():
    ev = evaluate(two("mean"))
    for path, v in TWO_LEAVES.items():
        assert node_value(ev, path) == Number(v)


def test_unknown_node():
    ev = evaluate(two("mean"))
    with pytest.raises(UnknownNode):
        node_value(ev, "c3")
    with pytest.raises(UnknownNode):
        subtree(two("mean"), ("c1", "x9"))


def test_domain_mismatch_reports_node():
    root = internal("r", "mean", [leaf("a", 1.0), leaf("b", "oops")])
    with pytest.raises(FunctionDomainMismatch) as exc:
        evaluate(MeasurementTree(root))
    assert exc.value.path == ()


def test_failing_user_function_wrapped():
    reg = builtin_catalog()
    reg.register(SummaryFunctionSpec("boom"), lambda v, w, p: 1 / 0)
    root = internal("r", "boom", [leaf("a", 1.0)], registry=reg)
    with pytest.raises(EvaluationFailed) as exc:
        evaluate(MeasurementTree(root), registry=reg)
    assert isinstance(exc.value.cause, ZeroDivisionError)


def test_all_missing_propagates_up():
    root = internal("r", "mean", [internal("a", "max", [leaf("a1"), leaf("a2")]), leaf("b", 4.0)])
    ev = evaluate(MeasurementTree(root))
    assert ev.value("a") is MISSING
    assert ev.root_value == Number(4.0)
    ev = evaluate(MeasurementTree(root, missing_policy="propagate"))
    assert ev.root_value is MISSING


def test_tree_policy_zero():
    root = internal("r", "mean", [leaf("a"), leaf("b", 4.0)])
    assert evaluate(MeasurementTree(root, missing_policy="zero")).root_value == Number(2.0)


def test_text_leaves_under_non_numeric_function():
    reg = builtin_catalog()
    from mtree.values import Kind

    reg.register(
        SummaryFunctionSpec("first", input_kinds={Kind.TEXT}, output_kind=Kind.TEXT, induces_ordering=False),
        lambda v, w, p: v[0],
    )
    root = internal("r", "first", [leaf("a", "hello"), leaf("b", "world")], registry=reg)
    assert evaluate(MeasurementTree(root), reg).root_value == Text("hello")


@given(st.integers(0, 2**32 - 1))
def test_composition_matches_oracle(seed):
    rng = random.Random(seed)
    topo = random_topology(rng)
    fns = random_functions(rng, topo, ["mean", "median", "max", "min", "sum", "count", "weighted_mean"])
    _, leaves = topology_paths(topo)
    data = random_leaves(rng, leaves, missing_rate=0.15)
    ev = evaluate(build_tree(topo, data, fns))
    expected = oracles.all_values(topo, data, fns)
    for path, v in expected.items():
        got = ev.values[path]
        assert (got is MISSING) if v is None else got == Number(v)


@given(st.integers(0, 2**32 - 1))
def test_determinism_and_subtree_consistency(seed):
    rng = random.Random(seed)
    topo = random_topology(rng)
    fns = random_functions(rng, topo)
    _, leaves = topology_paths(topo)
    t = build_tree(topo, random_leaves(rng, leaves), fns)
    ev = evaluate(t)
    assert evaluate(t) == ev
    for p in t.paths:
        sub = subtree(t, p)
        assert validate_laminar(sub) == []
        assert evaluate(sub).root_value == ev.values[p]
    # re-applying each function to stored child values reproduces the stored value
    from mtree.summary import DEFAULT_REGISTRY

    for p in t.internal_paths():
        node = t.node(p)
        kids = [ev.values[p + (c.label,)] for c in node.children]
        assert DEFAULT_REGISTRY.apply(node.function, kids, node.weights) == ev.values[p]


@pytest.mark.parametrize("name", ["mean", "median", "max", "min", "sum", "count"])
@given(xs=st.lists(st.floats(-100, 100), min_size=1, max_size=20))
def test_flat_tree_embeds_scalar_metric(name, xs):
    from mtree.summary import apply

    t = MeasurementTree(internal("m", name, [leaf(f"x{i}", x) for i, x in enumerate(xs)]))
    assert evaluate(t).root_value == apply(name, xs)


# -- subtree / prune ------------------------------------------------------------

def test_subtree_identity_and_leaf():
    t = two("mean")
    assert subtree(t, ()) == t
    s = subtree(t, "c1/x2")
    assert s.dataset_size == 1
    assert evaluate(s).root_value == Number(3.0)


def test_prune_depth():
    ev = evaluate(two("mean"))
    p1 = prune_depth(ev, 1)
    assert p1.tree.paths == [(), ("c1",), ("c2",)]
    assert [v.value for v in p1.values.values()] == [2, 2, 2]
    p0 = prune_depth(ev, 0)
    assert p0.tree.paths == [()]
    assert p0.root_value == Number(2.0)
    assert prune_depth(ev, 5) is ev
    assert prune_depth(ev, 2) is ev
    with pytest.raises(ValueError):
        prune_depth(ev, -1)


def test_prune_does_not_reaggregate():
    # re-applying mean to the pruned leaf values would give 3.0 too, so check
    # the boundary node keeps its computed max rather than a raw leaf
    root = internal("r", "mean", [internal("a", "max", [leaf("x", 1), leaf("y", 5)]), leaf("b", 1)])
    ev = evaluate(MeasurementTree(root))
    p = prune_depth(ev, 1)
    assert p.root_value == ev.root_value == Number(3.0)
    assert p.tree.node("a").is_leaf
    assert p.values[("a",)] == Number(5.0)


def test_parse_path():
    assert parse_path("") == ()
    assert parse_path("/") == ()
    assert parse_path("FT/annotation") == ("FT", "annotation")
    assert parse_path(("FT",)) == ("FT",)
