"""Summary functions and the registry that resolves them by name.

Every internal node of a measurement tree carries a
:class:`SummaryFunctionSpec`: the registered name, per-node parameters, and
metadata copied from the registry entry. Implementations are pure functions
``impl(values, weights, params) -> value`` that only ever see non-missing
children; the missing-data policy is applied by :meth:`Registry.apply`.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Any, Callable, Mapping, Optional, Sequence

from mtree.errors import (
    DuplicateName,
    FunctionDomainMismatch,
    InvalidMetadata,
    MissingCompetitorData,
    RegistryFrozen,
    UnknownFunction,
)
from mtree.values import MISSING, Category, Kind, Number, Value, Vector, as_value

MISSING_POLICIES = ("skip", "zero", "propagate")

Impl = Callable[[Sequence[Value], Sequence[float], Mapping[str, Any]], Any]


@dataclass(frozen=True)
class SummaryFunctionSpec:
    name: str
    params: Mapping[str, Any] = field(default_factory=dict)
    induces_ordering: bool = True
    weight_aware: bool = False
    input_kinds: frozenset = frozenset({Kind.NUMBER})
    output_kind: Kind = Kind.NUMBER
    # per-node override of the tree-wide missing-data policy
    missing_policy: Optional[str] = None
    # params holding one entry per child; filtered alongside skipped children
    per_child_params: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))
        object.__setattr__(self, "input_kinds", frozenset(Kind(k) for k in self.input_kinds))
        object.__setattr__(self, "output_kind", Kind(self.output_kind))
        if self.missing_policy is not None and self.missing_policy not in MISSING_POLICIES:
            raise ValueError(f"unknown missing policy {self.missing_policy!r}")

    def __eq__(self, other):
        if not isinstance(other, SummaryFunctionSpec):
            return NotImplemented
        return self.assignment() == other.assignment() and (
            self.induces_ordering,
            self.weight_aware,
            self.input_kinds,
            self.output_kind,
            self.per_child_params,
        ) == (
            other.induces_ordering,
            other.weight_aware,
            other.input_kinds,
            other.output_kind,
            other.per_child_params,
        )

    def __hash__(self):
        return hash((self.name, self.missing_policy))

    def assignment(self) -> tuple:
        """What a tree document records about the function: name, params, policy."""
        return (self.name, _freeze(dict(self.params)), self.missing_policy)


def _freeze(x):
    if isinstance(x, Mapping):
        return tuple(sorted((k, _freeze(v)) for k, v in x.items()))
    if isinstance(x, (list, tuple)):
        return tuple(_freeze(v) for v in x)
    return x


def _check_metadata(spec: SummaryFunctionSpec) -> None:
    if spec.output_kind is Kind.MISSING:
        raise InvalidMetadata(f"{spec.name}: output kind cannot be 'missing'")
    if not spec.input_kinds:
        raise InvalidMetadata(f"{spec.name}: no accepted input kinds")
    if not spec.induces_ordering:
        return
    if spec.output_kind in (Kind.TEXT, Kind.VECTOR):
        raise InvalidMetadata(
            f"{spec.name}: {spec.output_kind.value} output has no order, "
            "so the function cannot induce one"
        )
    if spec.output_kind is Kind.CATEGORY and not spec.params.get("order"):
        raise InvalidMetadata(
            f"{spec.name}: categorical output induces an ordering only with a declared 'order' param"
        )


class Registry:
    """Name → (metadata, implementation) table.

    The registry freezes the first time it applies a function; later
    registrations raise :class:`RegistryFrozen`.
    """

    def __init__(self):
        self._entries: dict[str, tuple[SummaryFunctionSpec, Impl]] = {}
        self._frozen = False

    def register(self, spec: SummaryFunctionSpec, impl: Impl) -> SummaryFunctionSpec:
        if self._frozen:
            raise RegistryFrozen(f"cannot register {spec.name!r}: registry is frozen")
        if spec.name in self._entries:
            raise DuplicateName(spec.name)
        _check_metadata(spec)
        self._entries[spec.name] = (spec, impl)
        return spec

    def freeze(self) -> "Registry":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def copy(self) -> "Registry":
        """An unfrozen copy, for extending a frozen registry."""
        other = Registry()
        other._entries = dict(self._entries)
        return other

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def names(self) -> list[str]:
        return sorted(self._entries)

    def get(self, name: str) -> SummaryFunctionSpec:
        try:
            return self._entries[name][0]
        except KeyError:
            raise UnknownFunction(name) from None

    def spec(
        self,
        name: str,
        params: Optional[Mapping[str, Any]] = None,
        missing_policy: Optional[str] = None,
    ) -> SummaryFunctionSpec:
        """Assignment-ready spec: registered metadata plus per-node params."""
        base = self.get(name)
        merged = dict(base.params)
        merged.update(params or {})
        spec = replace(base, params=merged, missing_policy=missing_policy)
        _check_metadata(spec)
        return spec

    def apply(
        self,
        spec: SummaryFunctionSpec,
        children: Sequence[Value],
        weights: Optional[Sequence[float]] = None,
        missing_policy: str = "skip",
    ) -> Value:
        if spec.name not in self._entries:
            raise UnknownFunction(spec.name)
        self._frozen = True
        impl = self._entries[spec.name][1]

        children = [as_value(c) for c in children]
        if not children:
            raise FunctionDomainMismatch(f"{spec.name}: no children to summarize")
        weights = [1.0] * len(children) if weights is None else [float(w) for w in weights]
        if len(weights) != len(children):
            raise FunctionDomainMismatch(
                f"{spec.name}: {len(weights)} weights for {len(children)} children"
            )

        policy = spec.missing_policy or missing_policy
        if policy == "propagate":
            if any(c is MISSING for c in children):
                return MISSING
            keep = list(range(len(children)))
        elif policy == "zero":
            children = [Number(0.0) if c is MISSING else c for c in children]
            keep = list(range(len(children)))
        elif policy == "skip":
            keep = [i for i, c in enumerate(children) if c is not MISSING]
            if not keep:
                return MISSING
        else:
            raise ValueError(f"unknown missing policy {policy!r}")

        values = [children[i] for i in keep]
        for v in values:
            if v.kind not in spec.input_kinds:
                accepted = ", ".join(sorted(k.value for k in spec.input_kinds))
                raise FunctionDomainMismatch(
                    f"{spec.name} accepts {accepted}; got {v.kind.value} {v!r}"
                )
        params = dict(spec.params)
        for key in spec.per_child_params:
            if key in params:
                seq = params[key]
                if len(seq) != len(children):
                    raise FunctionDomainMismatch(
                        f"{spec.name}: param {key!r} has {len(seq)} entries for {len(children)} children"
                    )
                params[key] = [seq[i] for i in keep]

        out = as_value(impl(values, [weights[i] for i in keep], params))
        if out is not MISSING and out.kind is not spec.output_kind:
            raise FunctionDomainMismatch(
                f"{spec.name} declared {spec.output_kind.value} output but returned {out.kind.value}"
            )
        return out


# -- built-in implementations ---------------------------------------------

def _floats(values: Sequence[Value]) -> list[float]:
    return [v.value for v in values]


def _mean(values, weights, params):
    xs = _floats(values)
    return math.fsum(xs) / len(xs)


def _median(values, weights, params):
    return statistics.median(_floats(values))


def _max(values, weights, params):
    return max(_floats(values))


def _min(values, weights, params):
    return min(_floats(values))


def _sum(values, weights, params):
    return math.fsum(_floats(values))


def _count(values, weights, params):
    return float(len(values))


def _weighted_mean(values, weights, params):
    xs = _floats(values)
    return math.fsum(w * x for w, x in zip(weights, xs)) / math.fsum(weights)


def _is_correct(v: Value, params: Mapping[str, Any]) -> bool:
    if isinstance(v, Number):
        if v.value not in (0.0, 1.0):
            raise FunctionDomainMismatch(f"accuracy expects 0/1 numbers, got {v.value}")
        return v.value == 1.0
    if isinstance(v, Category):
        return v.label == params.get("correct_label", "correct")
    if isinstance(v, Vector):
        if len(v.items) != 2:
            raise FunctionDomainMismatch(
                f"accuracy expects (prediction, label) pairs, got {len(v.items)} entries"
            )
        return v.items[0] == v.items[1]
    raise FunctionDomainMismatch(f"accuracy cannot score {v!r}")


def _accuracy(values, weights, params):
    return sum(_is_correct(v, params) for v in values) / len(values)


def _win_rate(score: float, competitors: Sequence[float], higher_is_better: bool) -> float:
    wins = 0.0
    for c in competitors:
        if score == c:
            wins += 0.5
        elif (score > c) == higher_is_better:
            wins += 1.0
    return wins / len(competitors)


def _mean_win_rate(values, weights, params):
    table = params.get("competitor_scores")
    if table is None:
        raise MissingCompetitorData("mean_win_rate needs a 'competitor_scores' param")
    if len(table) != len(values):
        raise MissingCompetitorData(
            f"mean_win_rate: {len(table)} competitor lists for {len(values)} children"
        )
    higher = bool(params.get("higher_is_better", True))
    rates = []
    for v, comps in zip(values, table):
        if not comps:
            raise MissingCompetitorData("mean_win_rate: empty competitor list")
        rates.append(_win_rate(v.value, [float(c) for c in comps], higher))
    return math.fsum(rates) / len(rates)


_NUMERIC = [
    ("mean", _mean, False),
    ("median", _median, False),
    ("max", _max, False),
    ("min", _min, False),
    ("sum", _sum, False),
    ("count", _count, False),
    ("weighted_mean", _weighted_mean, True),
]

BUILTIN_NAMES = tuple(name for name, _, _ in _NUMERIC)
# built-ins that are monotone and stay within [min, max] of their inputs
MONOTONE_NAMES = ("mean", "median", "max", "min", "weighted_mean")


def builtin_catalog() -> Registry:
    """A fresh, unfrozen registry holding the seven numeric built-ins."""
    reg = Registry()
    for name, impl, weighted in _NUMERIC:
        reg.register(SummaryFunctionSpec(name, weight_aware=weighted), impl)
    return reg


def default_registry() -> Registry:
    """Built-ins plus ``accuracy`` and ``mean_win_rate``; unfrozen."""
    reg = builtin_catalog()
    reg.register(
        SummaryFunctionSpec(
            "accuracy",
            input_kinds=frozenset({Kind.NUMBER, Kind.CATEGORY, Kind.VECTOR}),
        ),
        _accuracy,
    )
    reg.register(
        SummaryFunctionSpec("mean_win_rate", per_child_params=("competitor_scores",)),
        _mean_win_rate,
    )
    return reg


DEFAULT_REGISTRY = default_registry().freeze()


def apply(
    spec: SummaryFunctionSpec | str,
    children: Sequence[Any],
    weights: Optional[Sequence[float]] = None,
    missing_policy: str = "skip",
    registry: Optional[Registry] = None,
) -> Value:
    """Apply a summary function to child values (raw or :data:`Value`)."""
    registry = registry or DEFAULT_REGISTRY
    if isinstance(spec, str):
        spec = registry.spec(spec)
    return registry.apply(spec, children, weights, missing_policy)


def accuracy(children: Sequence[Any], params: Optional[Mapping[str, Any]] = None) -> float:
    """Fraction of children judged correct.

    A child is a 0/1 number, a category (correct when its label equals
    ``params["correct_label"]``, default ``"correct"``), or a
    ``(prediction, label)`` vector pair.
    """
    out = apply(DEFAULT_REGISTRY.spec("accuracy", params), children)
    return out.value


def mean_win_rate(children: Sequence[Any], params: Mapping[str, Any]) -> float:
    """Mean over children of the fraction of competitors each child beats.

    ``params["competitor_scores"][i]`` lists competitor values for child
    ``i``. Ties count as half a win.
    """
    out = apply(DEFAULT_REGISTRY.spec("mean_win_rate", params), children)
    return out.value
