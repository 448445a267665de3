import importlib.util
import os
import random

import pytest

from mtree.catalog import (
    CORIX_ITEMS,
    CORIX_VOCABULARY,
    HELM_SUBCONSTRUCTS,
    PILOT_MODELS,
    accuracy_tree,
    corix_from_level4,
    corix_from_responses,
    corix_level4_tree,
    corix_topology,
    helm_topology,
    helm_tree,
    pilot_level4,
    two_construct_tree,
)
from mtree.cli import fixture_dir
from mtree.core import evaluate, validate_laminar
from mtree.errors import UnknownItem
from mtree.io import ingest_signals, read_signal_table
from mtree.order import check_order_compatible, compare, Relation
from mtree.values import MISSING, Number

import oracles
from pilot_scores import LEVEL123, matches

HERE = os.path.dirname(os.path.abspath(__file__))


def load_generator():
    path = os.path.join(HERE, "..", "scripts", "generate_fixtures.py")
    spec = importlib.util.spec_from_file_location("generate_fixtures", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


# -- topology -------------------------------------------------------------------

def test_corix_shape():
    inst = corix_topology()
    t = inst.topology
    assert t["label"] == "V/R"
    assert [c["label"] for c in t["children"]] == ["MT", "RT", "FT"]
    mt = t["children"][0]
    assert [c["label"] for c in mt["children"]] == ["annotation"]
    assert len(inst.leaf_paths()) == len(CORIX_VOCABULARY)
    assert inst.function_for(()) == "max"
    assert inst.function_for(("RT",)) == "mean"
    assert inst.function_for(("FT", "perception")) == "median"
    assert inst.function_for(("RT", "perception")) == "mean"


def test_corix_tree_is_valid_and_self_compatible():
    t = corix_level4_tree(pilot_level4("A"))
    assert validate_laminar(t) == []
    assert check_order_compatible(t, t)


def test_items_without_scores_are_missing_nodes():
    ev = corix_from_level4(pilot_level4("A"))
    for key in [("RT", "annotation", "DD 1"), ("RT", "annotation", "DD 5"), ("FT", "annotation", "CC 2")]:
        assert ev.value(key) is MISSING
    assert ("RT", "annotation", "DD 5") in CORIX_VOCABULARY


def test_unknown_item_rejected():
    with pytest.raises(UnknownItem):
        corix_level4_tree({("MT", "annotation", "ZZ 1"): 1.0})


# -- pilot aggregates -----------------------------------------------------------

CHECKS = [(m, p) for m in "ABC" for p in LEVEL123[m]]


def test_check_count():
    assert len(CHECKS) == 27


@pytest.mark.parametrize("model,path", CHECKS, ids=[f"{m}:{'/'.join(p) or 'root'}" for m, p in CHECKS])
def test_pilot_aggregates(model, path):
    ev = corix_from_level4(pilot_level4(model))
    assert matches(ev.values[path].value, LEVEL123[model][path])


@pytest.mark.parametrize("model", "ABC")
def test_pilot_aggregates_match_independent_composition(model):
    inst = corix_topology()
    level4 = pilot_level4(model)
    leaves = {p: level4.get(p) for p in inst.leaf_paths()}
    fns = {p: name for p, (name, _) in inst.functions().items()}
    expected = oracles.all_values(inst.topology, leaves, fns)
    ev = corix_from_level4(level4)
    for p in inst.internal_paths():
        assert ev.values[p] == Number(expected[p])


def test_red_teaming_annotation_needs_the_skip():
    published = LEVEL123["A"][("RT", "annotation")]
    level4 = pilot_level4("A")
    forced = corix_from_level4({**level4, ("RT", "annotation", "DD 1"): 0.0})
    got = forced.values[("RT", "annotation")].value
    assert got == pytest.approx(28.11 / 9)
    assert round(got, 2) == 3.12
    assert not matches(got, published)
    # a tree-wide zero policy also zeroes the two items that never had rows
    zeroed = corix_from_level4(level4, missing_policy="zero").values[("RT", "annotation")].value
    assert zeroed == pytest.approx(28.11 / 11)
    assert not matches(zeroed, published)


def test_pilot_columns_order():
    evs = [corix_from_level4(pilot_level4(m)) for m in "ABC"]
    for i in range(3):
        for j in range(i + 1, 3):
            assert compare(evs[i], evs[j], "all").overall is Relation.INCOMPARABLE
    # on aggregates alone model A sits below both others
    assert compare(evs[0], evs[1], "non-leaf").overall is Relation.LESS_EQ
    assert compare(evs[0], evs[2], "non-leaf").overall is Relation.LESS_EQ
    assert compare(evs[1], evs[2], "non-leaf").overall is Relation.INCOMPARABLE


# -- five-level tree from responses ---------------------------------------------

def test_synthetic_responses_reproduce_level4():
    blob = open(os.path.join(fixture_dir(), "corix_model_a_signals.csv"), "rb").read()
    grouped = ingest_signals(read_signal_table(blob), CORIX_VOCABULARY)
    ev = evaluate(corix_from_responses(grouped))
    level4 = pilot_level4("A")
    assert ev.tree.height == 4
    for key in CORIX_VOCABULARY:
        if key in level4:
            assert ev.values[key].value == pytest.approx(level4[key], abs=1e-9)
        else:
            assert ev.values[key] is MISSING
    for path, published in LEVEL123["A"].items():
        assert matches(ev.values[path].value, published)


def test_repeated_session_ids_get_distinct_leaves():
    responses = {("MT", "annotation", "RA 1"): (("s1", 1.0), ("s1", 3.0))}
    t = corix_from_responses(responses)
    kids = [c.label for c in t.node(("MT", "annotation", "RA 1")).children]
    assert kids == ["s1", "s1#2"]


# -- HELM-style tree --------------------------------------------------------------

def test_helm_topology():
    inst = helm_topology()
    assert inst.function_for(()) == "mean_win_rate"
    assert len(inst.topology["children"]) == 4
    assert len(inst.leaf_paths()) == sum(map(len, HELM_SUBCONSTRUCTS.values()))


def test_helm_tree_matches_win_rate_oracle():
    rng = random.Random(11)
    scores, comps = {}, {}
    for sub, scenarios in HELM_SUBCONSTRUCTS.items():
        rows = []
        for s in scenarios:
            scores[(sub, s)] = rng.random()
            rows.append([rng.random() for _ in range(4)])
        comps[(sub,)] = rows
    comps[()] = [[rng.random() for _ in range(4)] for _ in HELM_SUBCONSTRUCTS]
    ev = evaluate(helm_tree(scores, comps))
    sub_values = []
    for sub, scenarios in HELM_SUBCONSTRUCTS.items():
        want = sum(oracles.win_rate(scores[(sub, s)], c) for s, c in zip(scenarios, comps[(sub,)])) / len(scenarios)
        assert ev.values[(sub,)].value == pytest.approx(want)
        sub_values.append(want)
    root = sum(oracles.win_rate(v, c) for v, c in zip(sub_values, comps[()])) / len(sub_values)
    assert ev.root_value.value == pytest.approx(root)
    assert 0.0 <= ev.root_value.value <= 1.0


# -- worked examples ----------------------------------------------------------------

def test_two_construct_examples():
    mean, mx = evaluate(two_construct_tree("mean")), evaluate(two_construct_tree("max"))
    assert [mean.value(p).value for p in ["", "construct 1", "construct 2"]] == [2, 2, 2]
    assert [mx.value(p).value for p in ["", "construct 1", "construct 2"]] == [3, 3, 2]


def test_accuracy_tree():
    assert evaluate(accuracy_tree([1, 1, 0, 1])).root_value == Number(0.75)
    assert evaluate(accuracy_tree([1] * 7)).root_value == Number(1.0)


# -- bundled files ------------------------------------------------------------------

def test_bundled_fixtures_are_current():
    gen = load_generator()
    expected = gen.all_fixtures()
    root = fixture_dir()
    assert sorted(expected) == sorted(os.listdir(root))
    for name, blob in expected.items():
        with open(os.path.join(root, name), "rb") as f:
            assert f.read() == blob, name


def test_pilot_model_labels():
    assert set(PILOT_MODELS) == {"A", "B", "C"}
    assert sum(map(len, CORIX_ITEMS.values())) == len(CORIX_VOCABULARY)
