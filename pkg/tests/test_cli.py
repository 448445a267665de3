import io
import json
import os
import sys

import pytest

from mtree.catalog import two_construct_tree
from mtree.cli import fixture_dir, main
from mtree.core import evaluate
from mtree.io import load_tree, parse_tree_file, write_tree_file

FX = fixture_dir()


def fx(name):
    return os.path.join(FX, name)


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def write(tmp_path, name, blob):
    p = tmp_path / name
    p.write_bytes(blob if isinstance(blob, bytes) else blob.encode("utf-8"))
    return str(p)


def flat_tree(values):
    return two_construct_tree("mean", values)


# -- validate -----------------------------------------------------------------------

def test_validate_fixture():
    assert run("validate", fx("corix_model_a.json")) == (0, "valid\n")


def test_validate_overlap(tmp_path):
    doc = {
        "format_version": "1",
        "tree": {
            "label": "r",
            "function": {"name": "mean"},
            "children": [
                {"label": "A", "function": {"name": "mean"}, "children": [
                    {"label": "a1", "value": 1, "datum": "x1"}, {"label": "a2", "value": 1, "datum": "x2"}]},
                {"label": "B", "function": {"name": "mean"}, "children": [
                    {"label": "b1", "value": 1, "datum": "x2"}, {"label": "b2", "value": 1, "datum": "x3"}]},
            ],
        },
    }
    code, text = run("validate", write(tmp_path, "bad.json", json.dumps(doc)))
    assert code == 1
    assert text.startswith("invalid:")
    assert "overlap" in text


def test_validate_malformed(tmp_path):
    assert run("validate", write(tmp_path, "x.json", b"{not json"))[0] == 2
    assert run("validate", str(tmp_path / "absent.json"))[0] == 2


def test_validate_unknown_function_is_invalid(tmp_path):
    blob = write_tree_file(flat_tree((1, 2, 3, 4))).replace(b'"mean"', b'"geomean"')
    code, text = run("validate", write(tmp_path, "t.json", blob))
    assert code == 1 and text.startswith("invalid:")


# -- eval ----------------------------------------------------------------------------

def test_eval_depth_one():
    code, text = run("eval", fx("corix_model_a.json"), "--depth", "1")
    assert code == 0
    assert [l.split()[-1] for l in text.splitlines()] == ["2.88", "0.72", "2.88", "2.37"]


def test_eval_dot_root_value():
    code, text = run("eval", fx("two_construct_mean.json"), "--format", "dot")
    assert code == 0
    assert 'n [label="measurand\\nmean\\n2.00"' in text


def test_eval_subtree():
    code, text = run("eval", fx("corix_model_b.json"), "--subtree", "FT")
    assert code == 0
    assert text.splitlines()[0] == "FT: mean 4.29"


def test_eval_unknown_subtree_exits_1():
    assert run("eval", fx("corix_model_b.json"), "--subtree", "XX")[0] == 1


def test_eval_json_is_fixpoint(tmp_path):
    code, first = run("eval", fx("corix_model_c.json"), "--format", "json")
    assert code == 0
    p = write(tmp_path, "c.json", first)
    assert run("eval", p, "--format", "json")[1] == first
    assert parse_tree_file(first).computed()[()].value == pytest.approx(6.30, abs=0.005)


def test_eval_json_pruned_reparses():
    code, text = run("eval", fx("corix_model_a.json"), "--format", "json", "--depth", "2")
    assert code == 0
    t = load_tree(text)
    assert t.height == 2
    assert round(evaluate(t).root_value.value, 2) == 2.88


def test_eval_domain_error_exits_1(tmp_path):
    blob = write_tree_file(flat_tree((1, 2, 3, 4))).replace(b'"value": 1.0', b'"value": "high"', 1)
    assert b'"high"' in blob
    assert run("eval", write(tmp_path, "t.json", blob))[0] == 1


def test_eval_stdin(monkeypatch):
    blob = open(fx("two_construct_max.json"), "rb").read()
    monkeypatch.setattr(sys, "stdin", io.TextIOWrapper(io.BytesIO(blob)))
    code, text = run("eval", "-")
    assert code == 0 and text.startswith("measurand: max 3.00")


def test_eval_thresholds_and_precision():
    code, text = run("eval", fx("corix_model_a.json"), "--format", "dot", "--thresholds", "none", "--precision", "1")
    assert code == 0
    assert "#1a9850" not in text
    assert "\\n2.9\"" in text
    code, text = run("eval", fx("corix_model_a.json"), "--format", "dot")
    assert "#1a9850" in text


# -- compare ----------------------------------------------------------------------------

def test_compare_self():
    code, text = run("compare", fx("corix_model_a.json"), fx("corix_model_a.json"))
    assert code == 0
    assert text == "relation: first = second (scope: all)\n"


def test_compare_mean_vs_max():
    code, text = run("compare", fx("two_construct_mean.json"), fx("two_construct_max.json"))
    assert code == 1
    assert "function mismatch" in text


def test_compare_dominance(tmp_path):
    a = write(tmp_path, "a.json", write_tree_file(flat_tree((1, 3, 2, 2))))
    b = write(tmp_path, "b.json", write_tree_file(flat_tree((1, 3, 2, 4))))
    code, text = run("compare", a, b)
    assert code == 0
    assert text.splitlines()[0] == "relation: first ≤ second (scope: all)"
    assert "  construct 2/x4: less (2.00 vs 4.00)" in text.splitlines()


def test_compare_incomparable_is_exit_0():
    code, text = run("compare", fx("corix_model_b.json"), fx("corix_model_c.json"), "--scope", "non-leaf")
    assert code == 0
    assert "∥" in text.splitlines()[0]


# -- order ----------------------------------------------------------------------------------

def test_order_chain(tmp_path):
    files = [write(tmp_path, f"t{k}.json", write_tree_file(flat_tree((k,) * 4))) for k in (1, 2, 3)]
    code, text = run("order", *files)
    assert code == 0
    lines = text.splitlines()
    i = lines.index("hasse edges (lower -> upper):")
    assert lines[i + 1 : i + 3] == ["  0 -> 1", "  1 -> 2"]
    assert "reflexivity: ok (3 trees)" in text
    code, dot = run("order", *files, "--format", "dot")
    assert "  t0 -> t1;\n  t1 -> t2;\n" in dot


def test_order_incomparable_and_single(tmp_path):
    code, text = run("order", fx("corix_model_a.json"), fx("corix_model_b.json"), fx("corix_model_c.json"))
    assert code == 0
    assert "incomparable pairs: 0 ∥ 1, 0 ∥ 2, 1 ∥ 2" in text
    assert "rank" not in text
    code, text = run("order", fx("corix_model_a.json"))
    assert code == 0 and "  (none)" in text


def test_order_incompatible():
    assert run("order", fx("two_construct_mean.json"), fx("two_construct_max.json"))[0] == 1


# -- ingest ---------------------------------------------------------------------------------

def test_ingest_matches_bundled_values(tmp_path):
    out = tmp_path / "a.json"
    code, _ = run("ingest", fx("corix_model_a_signals.csv"), "--label", "Model A", "--out", str(out))
    assert code == 0
    ingested = evaluate(load_tree(out.read_bytes()))
    golden = parse_tree_file(open(fx("corix_model_a.json"), "rb").read()).computed()
    for path, v in golden.items():
        assert ingested.values[path].value == pytest.approx(v.value, abs=1e-9)


def test_ingest_missing_item_is_missing_node(tmp_path):
    lines = open(fx("corix_model_a_signals.csv"), encoding="utf-8").read().splitlines(keepends=True)
    kept = [l for l in lines if ",RA 1,MT," not in l]
    assert len(kept) < len(lines)
    code, text = run("ingest", write(tmp_path, "s.csv", "".join(kept)))
    assert code == 0
    tree = json.loads(text)["tree"]
    mt = tree["children"][0]["children"][0]["children"]
    ra1 = next(c for c in mt if c["label"] == "RA 1")
    assert ra1 == {"label": "RA 1", "value": None}


def test_ingest_bad_delimiter_and_unknown_item(tmp_path):
    assert run("ingest", fx("corix_model_a_signals.csv"), "--delimiter", ";")[0] == 2
    csv = "session_id,item_id,testing_level,source,raw_value,raw_min,raw_max,direction\n"
    csv += "s1,ZZ 1,MT,annotation,1,0,10,higher_is_risk\n"
    assert run("ingest", write(tmp_path, "z.csv", csv))[0] == 1


def test_fixtures_lists_bundled_files():
    code, text = run("fixtures")
    assert code == 0
    names = [os.path.basename(l) for l in text.splitlines()]
    assert "corix_model_a.json" in names and "two_construct_max.json" in names
