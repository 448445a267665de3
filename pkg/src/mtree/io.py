"""Tree documents (JSON) and signal-table ingestion.

A tree document is one UTF-8 JSON object::

    {
      "format_version": "1",
      "defaults": {"missing_policy": "skip", "display_precision": 2},
      "metadata": {...},
      "tree": {"label": "root", "function": {"name": "mean"},
               "children": [{"label": "x1", "value": 1.0}, ...]}
    }

Node records carry ``label`` plus either ``children`` (internal; needs
``function``) or ``value`` (leaf; ``null`` is missing data). Optional record
fields: ``weight`` (edge weight into the node), ``datum`` (dataset element a
leaf stands for), ``members`` (declared element set, permissive mode only),
and ``computed`` (written for evaluated trees, ignored on input). Top-level
``dataset`` lists the elements the root must cover; ``data_ref`` names a JSON
file mapping leaf paths (``"a/b"``) to values for leaves without ``value``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence, Union

from mtree.core import (
    Candidate,
    EvaluatedTree,
    MeasurementTree,
    Node,
    Path,
    PATH_SEP,
    parse_path,
)
from mtree.errors import (
    DocumentSyntaxError,
    MissingFunctionBinding,
    MissingLeafBinding,
    NonPositiveWeight,
    ScaleViolation,
    SchemaError,
    SignalTableError,
    UnknownItem,
)
from mtree.summary import DEFAULT_REGISTRY, MISSING_POLICIES, Registry
from mtree.values import MISSING, Category, Number, Text, Value, Vector

FORMAT_VERSION = "1"

_TOP_KEYS = {"format_version", "tree", "defaults", "metadata", "dataset", "data_ref"}
_RECORD_KEYS = {"label", "children", "function", "weight", "value", "datum", "computed"}
_PERMISSIVE_RECORD_KEYS = _RECORD_KEYS | {"members"}
_FUNCTION_KEYS = {"name", "params", "missing_policy"}
_DEFAULT_KEYS = {"missing_policy", "display_precision", "color_thresholds"}


# -- values -----------------------------------------------------------------

def value_from_json(obj: Any, where: str = "value") -> Value:
    if obj is None:
        return MISSING
    if isinstance(obj, bool):
        raise SchemaError(where, "booleans are not values; use 0/1")
    if isinstance(obj, (int, float)):
        if not math.isfinite(obj):
            raise SchemaError(where, "numbers must be finite")
        return Number(obj)
    if isinstance(obj, str):
        return Text(obj)
    if isinstance(obj, list):
        try:
            return Vector(tuple(obj))
        except (TypeError, ValueError) as exc:
            raise SchemaError(where, f"bad vector: {exc}") from None
    if isinstance(obj, dict) and "category" in obj:
        try:
            return Category(obj["category"], tuple(obj["labels"]), bool(obj.get("ordered", False)))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(where, f"bad category: {exc}") from None
    raise SchemaError(where, f"cannot interpret {obj!r} as a value")


def value_to_json(v: Value) -> Any:
    if v is MISSING:
        return None
    if isinstance(v, Number):
        return v.value
    if isinstance(v, Text):
        return v.value
    if isinstance(v, Vector):
        return list(v.items)
    return {"category": v.label, "labels": list(v.labels), "ordered": v.ordered}


def _jsonable(x: Any) -> Any:
    if isinstance(x, Mapping):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


# -- documents --------------------------------------------------------------

@dataclass
class TreeDocument:
    tree: dict
    format_version: str = FORMAT_VERSION
    defaults: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    dataset: Optional[list] = None
    data_ref: Optional[str] = None
    # unknown top-level fields kept by permissive parsing
    extras: dict = field(default_factory=dict)
    mode: str = "strict"

    @property
    def missing_policy(self) -> str:
        return self.defaults.get("missing_policy", "skip")

    @property
    def display_precision(self) -> int:
        return self.defaults.get("display_precision", 2)

    @property
    def color_thresholds(self) -> Optional[list[float]]:
        return self.defaults.get("color_thresholds")

    def candidate(self) -> Candidate:
        """Unvalidated structure for :func:`mtree.core.validate_laminar`."""

        def make(rec) -> Candidate:
            members = rec.get("members")
            return Candidate(
                rec["label"],
                [make(c) for c in rec.get("children", [])],
                _hashable(rec.get("datum")),
                frozenset(_hashable(m) for m in members) if members is not None else None,
            )

        return make(self.tree)

    @property
    def universe(self) -> Optional[frozenset]:
        if self.dataset is None:
            return None
        return frozenset(_hashable(x) for x in self.dataset)

    def to_tree(self, registry: Optional[Registry] = None) -> MeasurementTree:
        registry = registry or DEFAULT_REGISTRY

        def make(rec, path: Path) -> Node:
            if "members" in rec:
                raise SchemaError(_where(path), "'members' is only meaningful for validation")
            children = rec.get("children")
            if children is None:
                if "value" not in rec:
                    raise MissingLeafBinding(path)
                return Node(
                    rec["label"],
                    observation=value_from_json(rec["value"], _where(path)),
                    datum=_hashable(rec.get("datum")),
                )
            fn = rec.get("function")
            if fn is None:
                raise MissingFunctionBinding(path)
            spec = registry.spec(fn["name"], fn.get("params"), fn.get("missing_policy"))
            kids, weights = [], []
            for c in children:
                w = float(c.get("weight", 1.0))
                if not w > 0:
                    raise NonPositiveWeight(path + (c["label"],), w)
                weights.append(w)
                kids.append(make(c, path + (c["label"],)))
            return Node(rec["label"], tuple(kids), tuple(weights), spec)

        return MeasurementTree(make(self.tree, ()), self.missing_policy, self.universe)

    def computed(self) -> dict[Path, Value]:
        """Values recorded under ``computed`` by a previous write."""
        out = {}

        def walk(rec, path):
            if "computed" in rec:
                out[path] = value_from_json(rec["computed"], _where(path))
            for c in rec.get("children", []):
                walk(c, path + (c["label"],))

        walk(self.tree, ())
        return out


def _hashable(x):
    if isinstance(x, list):
        return tuple(_hashable(v) for v in x)
    return x


def _where(path: Path) -> str:
    return "tree" + "".join(f"/{p}" for p in path)


def _check_record(rec, path: Path, strict: bool) -> None:
    where = _where(path)
    if not isinstance(rec, dict):
        raise SchemaError(where, "node record must be an object")
    label = rec.get("label")
    if not isinstance(label, str) or not label:
        raise SchemaError(where, "'label' must be a non-empty string")
    allowed = _RECORD_KEYS if strict else _PERMISSIVE_RECORD_KEYS
    unknown = set(rec) - allowed
    if unknown and strict:
        raise SchemaError(where, f"unknown fields {sorted(unknown)}")
    if "children" in rec and "value" in rec:
        raise SchemaError(where, "a node has either 'children' or 'value', not both")
    if "weight" in rec:
        w = rec["weight"]
        if isinstance(w, bool) or not isinstance(w, (int, float)):
            raise SchemaError(where, "'weight' must be a number")
    if "function" in rec:
        fn = rec["function"]
        if not isinstance(fn, dict) or not isinstance(fn.get("name"), str):
            raise SchemaError(where, "'function' must be an object with a string 'name'")
        bad = set(fn) - _FUNCTION_KEYS
        if bad:
            raise SchemaError(where, f"unknown function fields {sorted(bad)}")
        if "params" in fn and not isinstance(fn["params"], dict):
            raise SchemaError(where, "function 'params' must be an object")
        mp = fn.get("missing_policy")
        if mp is not None and mp not in MISSING_POLICIES:
            raise SchemaError(where, f"unknown missing policy {mp!r}")
        if "children" not in rec:
            raise SchemaError(where, "leaf nodes carry no function")
    if "value" in rec:
        value_from_json(rec["value"], where)
    if "members" in rec and not isinstance(rec["members"], list):
        raise SchemaError(where, "'members' must be a list")
    if "children" in rec:
        children = rec["children"]
        if not isinstance(children, list):
            raise SchemaError(where, "'children' must be a list")
        for c in children:
            _check_record(c, path + (c.get("label", "?") if isinstance(c, dict) else "?",), strict)


def _load_data_ref(ref: str, base_dir: Optional[str]) -> dict:
    full = ref if os.path.isabs(ref) or base_dir is None else os.path.join(base_dir, ref)
    try:
        with open(full, "rb") as f:
            data = json.loads(f.read().decode("utf-8"))
    except OSError as exc:
        raise SchemaError("data_ref", f"cannot read {ref!r}: {exc}") from None
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DocumentSyntaxError(f"data_ref {ref!r}: {exc}") from None
    if not isinstance(data, dict):
        raise SchemaError("data_ref", "must map leaf paths to values")
    return data


def _bind_data(rec, path: Path, data: Mapping[str, Any]) -> None:
    children = rec.get("children")
    if children is None:
        key = PATH_SEP.join(path)
        if "value" not in rec and key in data:
            rec["value"] = data[key]
        return
    for c in children:
        _bind_data(c, path + (c["label"],), data)


def parse_tree_file(
    data: Union[bytes, str],
    mode: str = "strict",
    base_dir: Optional[str] = None,
    registry: Optional[Registry] = None,
) -> TreeDocument:
    """Parse a tree document.

    Strict mode rejects unknown fields and fully validates the tree (function
    names, hierarchical-clustering structure); permissive mode keeps unknown
    fields and leaves structural checks to :func:`validate_laminar` on
    :meth:`TreeDocument.candidate`.
    """
    if mode not in ("strict", "permissive"):
        raise ValueError(f"mode must be 'strict' or 'permissive', got {mode!r}")
    strict = mode == "strict"
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentSyntaxError(f"not UTF-8: {exc.reason} at byte {exc.start}") from None
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentSyntaxError(exc.msg, exc.lineno, exc.colno) from None

    if not isinstance(obj, dict):
        raise SchemaError("document", "top level must be an object")
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise SchemaError("format_version", f"unsupported version {version!r}")
    if "tree" not in obj:
        raise SchemaError("document", "missing 'tree'")
    unknown = set(obj) - _TOP_KEYS
    if unknown and strict:
        raise SchemaError("document", f"unknown fields {sorted(unknown)}")

    defaults = obj.get("defaults", {})
    if not isinstance(defaults, dict):
        raise SchemaError("defaults", "must be an object")
    bad = set(defaults) - _DEFAULT_KEYS
    if bad and strict:
        raise SchemaError("defaults", f"unknown fields {sorted(bad)}")
    if defaults.get("missing_policy", "skip") not in MISSING_POLICIES:
        raise SchemaError("defaults.missing_policy", f"unknown policy {defaults['missing_policy']!r}")
    prec = defaults.get("display_precision", 2)
    if isinstance(prec, bool) or not isinstance(prec, int) or prec < 0:
        raise SchemaError("defaults.display_precision", "must be a nonnegative integer")
    thresholds = defaults.get("color_thresholds")
    if thresholds is not None:
        if not isinstance(thresholds, list) or any(
            isinstance(t, bool) or not isinstance(t, (int, float)) for t in thresholds
        ):
            raise SchemaError("defaults.color_thresholds", "must be a list of numbers")

    metadata = obj.get("metadata", {})
    if not isinstance(metadata, dict):
        raise SchemaError("metadata", "must be an object")
    dataset = obj.get("dataset")
    if dataset is not None and not isinstance(dataset, list):
        raise SchemaError("dataset", "must be a list")

    tree = obj["tree"]
    _check_record(tree, (), strict)
    data_ref = obj.get("data_ref")
    if data_ref is not None:
        if not isinstance(data_ref, str):
            raise SchemaError("data_ref", "must be a file path")
        _bind_data(tree, (), _load_data_ref(data_ref, base_dir))

    doc = TreeDocument(
        tree=tree,
        format_version=version,
        defaults=defaults,
        metadata=metadata,
        dataset=dataset,
        data_ref=data_ref,
        extras={k: obj[k] for k in unknown},
        mode=mode,
    )
    if strict:
        doc.to_tree(registry)
    return doc


def load_tree(
    data: Union[bytes, str], base_dir: Optional[str] = None, registry: Optional[Registry] = None
) -> MeasurementTree:
    """Strictly parse a document and return its tree."""
    return parse_tree_file(data, "strict", base_dir, registry).to_tree(registry)


def _record(node: Node, path: Path, values: Optional[Mapping[Path, Value]]) -> dict:
    rec: dict[str, Any] = {"label": node.label}
    if node.datum is not None:
        rec["datum"] = _jsonable(node.datum)
    if node.is_leaf:
        rec["value"] = value_to_json(node.observation)
        return rec
    fn: dict[str, Any] = {"name": node.function.name}
    if node.function.params:
        fn["params"] = _jsonable(dict(node.function.params))
    if node.function.missing_policy is not None:
        fn["missing_policy"] = node.function.missing_policy
    rec["function"] = fn
    children = []
    for child, w in zip(node.children, node.weights):
        crec = _record(child, path + (child.label,), values)
        if w != 1.0:
            crec["weight"] = w
        children.append(crec)
    rec["children"] = children
    if values is not None:
        rec["computed"] = value_to_json(values[path])
    return rec


def tree_document(
    tree: Union[MeasurementTree, EvaluatedTree],
    metadata: Optional[Mapping[str, Any]] = None,
    defaults: Optional[Mapping[str, Any]] = None,
) -> dict:
    values = None
    if isinstance(tree, EvaluatedTree):
        values = tree.values
        tree = tree.tree
    doc: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "defaults": {"display_precision": 2, **(defaults or {}), "missing_policy": tree.missing_policy},
        "metadata": _jsonable(dict(metadata or {})),
        "tree": _record(tree.root, (), values),
    }
    if tree.universe is not None:
        doc["dataset"] = sorted(_jsonable(tree.universe), key=repr)
    return doc


def write_tree_file(
    tree: Union[MeasurementTree, EvaluatedTree],
    metadata: Optional[Mapping[str, Any]] = None,
    defaults: Optional[Mapping[str, Any]] = None,
) -> bytes:
    """Canonical UTF-8 JSON: sorted keys, children in declaration order.

    Evaluated trees also record each internal node's value under
    ``computed``. Output is byte-stable for equal inputs.
    """
    doc = tree_document(tree, metadata, defaults)
    return (json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n").encode(
        "utf-8"
    )


def write_document(doc: TreeDocument, tree: Union[MeasurementTree, EvaluatedTree]) -> bytes:
    """Write ``tree`` keeping ``doc``'s metadata and display defaults."""
    defaults = {k: v for k, v in doc.defaults.items() if k != "missing_policy"}
    return write_tree_file(tree, doc.metadata, defaults)


# -- signals ----------------------------------------------------------------

DIRECTIONS = ("higher_is_risk", "lower_is_risk")
SIGNAL_COLUMNS = (
    "session_id",
    "item_id",
    "testing_level",
    "source",
    "raw_value",
    "raw_min",
    "raw_max",
    "direction",
)


@dataclass(frozen=True)
class ScaleSpec:
    raw_min: float
    raw_max: float
    direction: str = "higher_is_risk"

    def __post_init__(self):
        if not self.raw_min < self.raw_max:
            raise ValueError(f"raw_min {self.raw_min} must be below raw_max {self.raw_max}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")


def normalize_scale(raw: float, spec: ScaleSpec) -> float:
    """Map ``raw`` affinely onto 0-10, where 10 is highest risk."""
    if not spec.raw_min <= raw <= spec.raw_max:
        raise ScaleViolation(raw, spec.raw_min, spec.raw_max)
    mapped = 10.0 * (raw - spec.raw_min) / (spec.raw_max - spec.raw_min)
    if spec.direction == "lower_is_risk":
        mapped = 10.0 - mapped
    return mapped


@dataclass(frozen=True)
class SignalRow:
    session_id: str
    item_id: str
    testing_level: str
    source: str
    raw_value: float
    scale: ScaleSpec

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.testing_level, self.source, self.item_id)


def read_signal_table(data: Union[bytes, str], delimiter: str = ",") -> list[SignalRow]:
    """Parse a delimited signal table with a header row.

    Rows with an empty ``raw_value`` are dropped (no response recorded).
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SignalTableError(f"not UTF-8: {exc.reason}") from None
    reader = csv.DictReader(_io.StringIO(data), delimiter=delimiter)
    header = reader.fieldnames or []
    absent = [c for c in SIGNAL_COLUMNS if c not in header]
    if absent:
        raise SignalTableError(f"header lacks columns {absent} (delimiter {delimiter!r})")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if None in rec or any(rec[c] is None for c in SIGNAL_COLUMNS):
            raise SignalTableError(f"line {lineno}: wrong number of fields")
        raw = rec["raw_value"].strip()
        if not raw:
            continue
        try:
            scale = ScaleSpec(float(rec["raw_min"]), float(rec["raw_max"]), rec["direction"].strip())
            value = float(raw)
        except ValueError as exc:
            raise SignalTableError(f"line {lineno}: {exc}") from None
        if not math.isfinite(value):
            raise SignalTableError(f"line {lineno}: raw value must be finite")
        rows.append(
            SignalRow(
                rec["session_id"].strip(),
                rec["item_id"].strip(),
                rec["testing_level"].strip(),
                rec["source"].strip(),
                value,
                scale,
            )
        )
    return rows


def ingest_signals(
    rows: Sequence[SignalRow], vocabulary: Sequence[tuple[str, str, str]]
) -> dict[tuple[str, str, str], tuple[tuple[str, float], ...]]:
    """Group normalized responses by ``(testing_level, source, item_id)``.

    Every vocabulary key is present in the result; keys without rows map to
    an empty tuple. Responses are sorted, so row order does not matter.
    """
    known = set(vocabulary)
    grouped: dict[tuple[str, str, str], list[tuple[str, float]]] = {k: [] for k in vocabulary}
    for row in rows:
        if row.key not in known:
            raise UnknownItem(" ".join(row.key))
        grouped[row.key].append((row.session_id, normalize_scale(row.raw_value, row.scale)))
    return {k: tuple(sorted(v)) for k, v in grouped.items()}
