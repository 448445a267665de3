"""Tagged values stored at tree nodes.

A node's value is one of five kinds: a finite number, a category drawn from
a declared label set, free text, a vector, or ``MISSING``. Raw Python values
are coerced with :func:`as_value`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Union

from mtree.errors import UnorderableValueKind


class Kind(str, Enum):
    NUMBER = "number"
    CATEGORY = "category"
    TEXT = "text"
    VECTOR = "vector"
    MISSING = "missing"


@dataclass(frozen=True)
class Number:
    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v):
            raise ValueError(f"numbers must be finite, got {self.value!r}")
        object.__setattr__(self, "value", v)

    kind = Kind.NUMBER


@dataclass(frozen=True)
class Category:
    label: str
    labels: tuple[str, ...]
    ordered: bool = False

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate labels in {self.labels!r}")
        if self.label not in self.labels:
            raise ValueError(f"{self.label!r} is not one of {self.labels!r}")

    kind = Kind.CATEGORY

    @property
    def rank(self) -> int:
        return self.labels.index(self.label)


@dataclass(frozen=True)
class Text:
    value: str

    kind = Kind.TEXT


@dataclass(frozen=True)
class Vector:
    """A sequence of finite reals or string labels.

    String entries exist so that (prediction, label) pairs can be stored as
    leaf observations; see :func:`mtree.summary.accuracy`.
    """

    items: tuple[Union[float, str], ...]

    def __post_init__(self):
        items = []
        for x in self.items:
            if isinstance(x, str):
                items.append(x)
                continue
            x = float(x)
            if not math.isfinite(x):
                raise ValueError("vector entries must be finite")
            items.append(x)
        object.__setattr__(self, "items", tuple(items))

    kind = Kind.VECTOR


class _Missing:
    """Singleton marking absent data."""

    _instance = None
    kind = Kind.MISSING

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "MISSING"

    def __reduce__(self):
        return (_Missing, ())


MISSING = _Missing()

Value = Union[Number, Category, Text, Vector, _Missing]


def as_value(x: Any) -> Value:
    """Coerce a raw Python object into a :data:`Value`.

    ``None`` becomes ``MISSING``, real numbers become :class:`Number`,
    strings :class:`Text`, and lists/tuples :class:`Vector`. Values pass
    through unchanged.
    """
    if isinstance(x, (Number, Category, Text, Vector, _Missing)):
        return x
    if x is None:
        return MISSING
    if isinstance(x, bool):
        return Number(float(x))
    if isinstance(x, (int, float)):
        return Number(x)
    if isinstance(x, str):
        return Text(x)
    if isinstance(x, (list, tuple)):
        return Vector(tuple(x))
    # numpy scalars and friends
    try:
        return Number(float(x))
    except (TypeError, ValueError):
        raise TypeError(f"cannot interpret {x!r} as a node value") from None


def is_missing(v: Value) -> bool:
    return v is MISSING


def number(v: Value) -> float:
    if not isinstance(v, Number):
        raise TypeError(f"expected a number, got {v!r}")
    return v.value


def orderable(v: Value) -> bool:
    if isinstance(v, Number) or v is MISSING:
        return True
    return isinstance(v, Category) and v.ordered


def compare_values(a: Value, b: Value) -> str:
    """Three-way comparison under the value kind's order.

    Returns one of ``"less"``, ``"equal"``, ``"greater"``, ``"incomparable"``.
    ``MISSING`` equals only ``MISSING`` and is incomparable to anything else.
    Text, vectors, and unordered categories have no order and raise
    :class:`UnorderableValueKind`.
    """
    for v in (a, b):
        if not orderable(v):
            raise UnorderableValueKind(v.kind.value)
    if a is MISSING or b is MISSING:
        return "equal" if a is b else "incomparable"
    if isinstance(a, Number) and isinstance(b, Number):
        x, y = a.value, b.value
    elif isinstance(a, Category) and isinstance(b, Category):
        if a.labels != b.labels:
            return "incomparable"
        x, y = a.rank, b.rank
    else:
        return "incomparable"
    if x < y:
        return "less"
    if x > y:
        return "greater"
    return "equal"


def format_value(v: Value, precision: int = 2, missing_marker: str = "--") -> str:
    if v is MISSING:
        return missing_marker
    if isinstance(v, Number):
        s = f"{v.value:.{precision}f}"
        # avoid "-0.00" for tiny negatives
        if float(s) == 0.0:
            s = s.lstrip("-")
        return s
    if isinstance(v, Category):
        return v.label
    if isinstance(v, Text):
        return v.value
    parts = [x if isinstance(x, str) else f"{x:.{precision}f}" for x in v.items]
    return "[" + ", ".join(parts) + "]"
