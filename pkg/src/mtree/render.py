"""Text and Graphviz DOT views of evaluated trees.

Renderers only format values already stored in an :class:`EvaluatedTree`.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from mtree.core import EvaluatedTree, Node, Path, parse_path
from mtree.values import MISSING, Number, format_value

# ColorBrewer RdYlGn, reversed: low risk green, high risk red
_PALETTE = (
    "#1a9850", "#66bd63", "#a6d96a", "#d9ef8b", "#ffffbf",
    "#fee08b", "#fdae61", "#f46d43", "#d73027",
)
MISSING_FILL = "#d9d9d9"


@dataclass(frozen=True)
class RenderOptions:
    max_depth: Optional[int] = None
    subtree_path: Optional[Path] = None
    precision: int = 2
    show_functions: bool = True
    missing_marker: str = "--"
    color_thresholds: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.precision < 0:
            raise ValueError("precision must be nonnegative")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be nonnegative")
        if self.subtree_path is not None:
            object.__setattr__(self, "subtree_path", parse_path(self.subtree_path))
        if self.color_thresholds is not None:
            t = tuple(float(x) for x in self.color_thresholds)
            if any(b <= a for a, b in zip(t, t[1:])):
                raise ValueError("color thresholds must be strictly increasing")
            object.__setattr__(self, "color_thresholds", t)


def _visible(evaluated: EvaluatedTree, opts: RenderOptions) -> Iterator[tuple[Path, tuple[int, ...], Node]]:
    """Yield ``(absolute path, index path relative to start, node)`` in pre-order."""
    start = opts.subtree_path or ()
    top = evaluated.tree.node(start)

    def walk(node: Node, path: Path, idx: tuple[int, ...]):
        yield path, idx, node
        if opts.max_depth is not None and len(idx) >= opts.max_depth:
            return
        for i, c in enumerate(node.children):
            yield from walk(c, path + (c.label,), idx + (i,))

    yield from walk(top, start, ())


def render_text(evaluated: EvaluatedTree, opts: RenderOptions = RenderOptions()) -> str:
    """One line per node, indented two spaces per level: ``label: function value``."""
    lines = []
    for path, idx, node in _visible(evaluated, opts):
        value = format_value(evaluated.values[path], opts.precision, opts.missing_marker)
        fn = f"{node.function.name} " if opts.show_functions and not node.is_leaf else ""
        lines.append(f"{'  ' * len(idx)}{node.label}: {fn}{value}")
    return "\n".join(lines) + "\n"


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def _node_id(idx: Sequence[int]) -> str:
    return "n" + "".join(f"_{i}" for i in idx)


def fill_color(value, thresholds: Sequence[float]) -> str:
    if value is MISSING:
        return MISSING_FILL
    if not isinstance(value, Number):
        return "white"
    bins = len(thresholds) + 1
    b = bisect_right(list(thresholds), value.value)
    if bins == 1:
        return _PALETTE[0]
    return _PALETTE[round(b * (len(_PALETTE) - 1) / (bins - 1))]


def render_dot(evaluated: EvaluatedTree, opts: RenderOptions = RenderOptions()) -> str:
    """A ``digraph`` with one statement per node and one edge per parent-child pair.

    Node ids follow child positions (``n``, ``n_0``, ``n_0_1``, ...). Edges
    carry their weight as a label when it is not 1.
    """
    out = [
        "digraph measurement_tree {",
        "  rankdir=TB;",
        '  node [shape=box, style="rounded,filled", fillcolor="white", fontname="Helvetica"];',
    ]
    edges = []
    for path, idx, node in _visible(evaluated, opts):
        value = evaluated.values[path]
        parts = [node.label]
        if opts.show_functions and not node.is_leaf:
            parts.append(node.function.name)
        parts.append(format_value(value, opts.precision, opts.missing_marker))
        label = "\\n".join(_dot_escape(p) for p in parts)
        attrs = [f'label="{label}"']
        if opts.color_thresholds is not None:
            attrs.append(f'fillcolor="{fill_color(value, opts.color_thresholds)}"')
        elif value is MISSING:
            attrs.append(f'fillcolor="{MISSING_FILL}"')
        out.append(f"  {_node_id(idx)} [{', '.join(attrs)}];")
        if idx:
            parent = evaluated.tree.node(path[:-1])
            w = parent.weights[idx[-1]]
            extra = f' [label="{w:g}"]' if w != 1.0 else ""
            edges.append(f"  {_node_id(idx[:-1])} -> {_node_id(idx)}{extra};")
    out.extend(edges)
    out.append("}")
    return "\n".join(out) + "\n"
