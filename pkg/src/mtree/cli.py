"""``mtree`` command line.

Exit codes: 0 success, 1 validation or comparison precondition failure,
2 unreadable input, 3 internal error.
"""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources
from typing import Optional, Sequence, TextIO

from mtree.catalog import CORIX_VOCABULARY, corix_from_responses
from mtree.core import evaluate, format_path, parse_path, prune_depth, subtree, validate_laminar
from mtree.errors import IncompatibleTrees, InputError, TreeError
from mtree.io import (
    ingest_signals,
    parse_tree_file,
    read_signal_table,
    write_document,
    write_tree_file,
)
from mtree.order import compare, poset
from mtree.render import RenderOptions, render_dot, render_text
from mtree.values import format_value

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


def _read(path: str) -> tuple[bytes, Optional[str]]:
    if path == "-":
        return sys.stdin.buffer.read(), None
    try:
        with open(path, "rb") as f:
            return f.read(), os.path.dirname(os.path.abspath(path))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load(path: str, mode: str = "strict"):
    data, base = _read(path)
    return parse_tree_file(data, mode, base)


def cmd_validate(args, out: TextIO) -> int:
    doc = _load(args.file, "permissive")
    violations = validate_laminar(doc.candidate(), doc.universe)
    if not violations:
        try:
            doc.to_tree()
        except TreeError as exc:
            out.write(f"invalid: {exc}\n")
            return EXIT_INVALID
        out.write("valid\n")
        return EXIT_OK
    out.write(f"invalid: {len(violations)} violation(s)\n")
    for v in violations:
        out.write(f"  {v}\n")
    return EXIT_INVALID


def _thresholds(arg: Optional[str], doc) -> Optional[tuple[float, ...]]:
    if arg is None:
        t = doc.color_thresholds
        return tuple(t) if t else None
    if arg == "none":
        return None
    return tuple(float(x) for x in arg.split(","))


def cmd_eval(args, out: TextIO) -> int:
    doc = _load(args.file)
    evaluated = evaluate(doc.to_tree())
    path = parse_path(args.subtree) if args.subtree else None
    if args.format == "json":
        if path:
            evaluated = evaluate(subtree(evaluated.tree, path))
        if args.depth is not None:
            evaluated = prune_depth(evaluated, args.depth)
        out.write(write_document(doc, evaluated).decode("utf-8"))
        return EXIT_OK
    opts = RenderOptions(
        max_depth=args.depth,
        subtree_path=path,
        precision=doc.display_precision if args.precision is None else args.precision,
        show_functions=not args.hide_functions,
        color_thresholds=_thresholds(args.thresholds, doc),
    )
    render = render_dot if args.format == "dot" else render_text
    out.write(render(evaluated, opts))
    return EXIT_OK


def cmd_compare(args, out: TextIO) -> int:
    a = evaluate(_load(args.file_a).to_tree())
    b = evaluate(_load(args.file_b).to_tree())
    try:
        report = compare(a, b, args.scope)
    except IncompatibleTrees as exc:
        out.write("not comparable\n")
        for r in exc.reasons:
            out.write(f"  {r}\n")
        return EXIT_INVALID
    out.write(f"relation: first {report.overall.value} second (scope: {args.scope})\n")
    div = report.divergences()
    if div:
        out.write("differing nodes:\n")
    for p, outcome in div.items():
        va = format_value(a.values[p], args.precision)
        vb = format_value(b.values[p], args.precision)
        out.write(f"  {format_path(p)}: {outcome.value} ({va} vs {vb})\n")
    return EXIT_OK


def cmd_order(args, out: TextIO) -> int:
    trees = [evaluate(_load(f).to_tree()) for f in args.files]
    try:
        result = poset(trees, args.scope)
    except IncompatibleTrees as exc:
        out.write("not comparable\n")
        for r in exc.reasons:
            out.write(f"  {r}\n")
        return EXIT_INVALID
    n = len(trees)
    if args.format == "dot":
        out.write("digraph hasse {\n  rankdir=BT;\n  node [shape=box];\n")
        for i, f in enumerate(args.files):
            out.write(f'  t{i} [label="{i}: {os.path.basename(f)}"];\n')
        for lo, hi in result.hasse_edges:
            out.write(f"  t{lo} -> t{hi};\n")
        out.write("}\n")
        return EXIT_OK
    out.write("trees:\n")
    for i, f in enumerate(args.files):
        out.write(f"  [{i}] {f}\n")
    width = max(2, len(str(n - 1)) + 1)
    out.write("relation (row vs column; ∥ = incomparable):\n")
    out.write(" " * (width + 2) + "".join(f"{j:>{width}}" for j in range(n)) + "\n")
    for i in range(n):
        cells = "".join(f"{result.relation[i][j].value:>{width}}" for j in range(n))
        out.write(f"  {i:>{width}}{cells}\n")
    out.write("hasse edges (lower -> upper):\n")
    for lo, hi in result.hasse_edges:
        out.write(f"  {lo} -> {hi}\n")
    if not result.hasse_edges:
        out.write("  (none)\n")
    pairs = result.incomparable_pairs()
    if pairs:
        out.write("incomparable pairs: " + ", ".join(f"{i} ∥ {j}" for i, j in pairs) + "\n")
    out.write("axioms:\n")
    for line in result.axiom_report.lines():
        out.write(f"  {line}\n")
    return EXIT_OK


INSTRUMENTS = {"corix": (CORIX_VOCABULARY, corix_from_responses)}


def cmd_ingest(args, out: TextIO) -> int:
    data, _ = _read(args.signals)
    rows = read_signal_table(data, args.delimiter)
    vocabulary, build = INSTRUMENTS[args.instrument]
    tree = build(ingest_signals(rows, vocabulary))
    metadata = {"instrument": args.instrument}
    if args.label:
        metadata["label"] = args.label
    blob = write_tree_file(tree, metadata)
    if args.out:
        with open(args.out, "wb") as f:
            f.write(blob)
    else:
        out.write(blob.decode("utf-8"))
    return EXIT_OK


def fixture_dir() -> str:
    return str(resources.files("mtree") / "fixtures")


def cmd_fixtures(args, out: TextIO) -> int:
    root = fixture_dir()
    for name in sorted(os.listdir(root)):
        if name.endswith((".json", ".csv")):
            out.write(os.path.join(root, name) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mtree", description="Measurement trees: evaluate, compare, render.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check that a document describes a hierarchical clustering")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="evaluate a tree and render it")
    p.add_argument("file")
    p.add_argument("--depth", type=int, help="hide nodes deeper than this")
    p.add_argument("--subtree", help="label path of the node to start from, e.g. FT/annotation")
    p.add_argument("--format", choices=("text", "dot", "json"), default="text")
    p.add_argument("--precision", type=int, help="decimals shown (default from document)")
    p.add_argument("--thresholds", help="comma-separated color breakpoints for dot, or 'none'")
    p.add_argument("--hide-functions", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="compare two order-compatible trees")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--scope", choices=("all", "non-leaf"), default="all")
    p.add_argument("--precision", type=int, default=2)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("order", help="partial order and Hasse diagram of several trees")
    p.add_argument("files", nargs="+")
    p.add_argument("--scope", choices=("all", "non-leaf"), default="all")
    p.add_argument("--format", choices=("text", "dot"), default="text")
    p.set_defaults(func=cmd_order)

    p = sub.add_parser("ingest", help="build a tree document from a signal table")
    p.add_argument("signals")
    p.add_argument("--instrument", choices=sorted(INSTRUMENTS), default="corix")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--label", help="model/task label stored in metadata")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fixtures", help="list the bundled example documents")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    args = build_parser().parse_args(argv)
    if out is None:
        out = sys.stdout
        if hasattr(out, "reconfigure"):
            out.reconfigure(encoding="utf-8")
    try:
        return args.func(args, out)
    except (InputError, ValueError) as exc:
        sys.stderr.write(f"mtree: {exc}\n")
        return EXIT_INPUT
    except TreeError as exc:
        sys.stderr.write(f"mtree: {exc}\n")
        return EXIT_INVALID
    except Exception as exc:  # pragma: no cover
        sys.stderr.write(f"mtree: internal error: {exc!r}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
