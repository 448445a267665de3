"""Exception hierarchy.

Everything raised on bad input derives from :class:`MeasurementTreeError`;
the CLI maps the two subtrees (:class:`InputError`, :class:`TreeError`) to
exit codes 2 and 1.
"""


class MeasurementTreeError(Exception):
    pass


class InputError(MeasurementTreeError):
    """Malformed input bytes, documents, or tables."""


class TreeError(MeasurementTreeError):
    """Structurally readable input that violates a tree or order contract."""


# -- construction ---------------------------------------------------------

class MissingLeafBinding(TreeError):
    def __init__(self, path):
        self.path = path
        super().__init__(f"no observation bound for leaf {path!r}")


class MissingFunctionBinding(TreeError):
    def __init__(self, path):
        self.path = path
        super().__init__(f"no summary function bound for internal node {path!r}")


class DuplicateSiblingLabel(TreeError):
    def __init__(self, path, label):
        self.path = path
        self.label = label
        super().__init__(f"label {label!r} appears twice under {path!r}")


class EmptyInternalNode(TreeError):
    def __init__(self, path):
        self.path = path
        super().__init__(f"internal node {path!r} has no children")


class NonPositiveWeight(TreeError):
    def __init__(self, path, weight):
        self.path = path
        self.weight = weight
        super().__init__(f"edge weight {weight!r} into {path!r} is not positive")


class ValidationFailed(TreeError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"not a hierarchical clustering: {lines}")


class UnknownNode(TreeError):
    def __init__(self, path):
        self.path = path
        super().__init__(f"no node at path {path!r}")


# -- summary functions ----------------------------------------------------

class UnknownFunction(TreeError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"no summary function named {name!r}")


class DuplicateName(TreeError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"summary function {name!r} is already registered")


class InvalidMetadata(TreeError):
    pass


class RegistryFrozen(TreeError):
    pass


class FunctionDomainMismatch(TreeError):
    pass


class MissingCompetitorData(FunctionDomainMismatch):
    pass


class EvaluationFailed(TreeError):
    def __init__(self, path, cause):
        self.path = path
        self.cause = cause
        super().__init__(f"evaluation failed at {path!r}: {cause}")


# -- ordering -------------------------------------------------------------

class IncompatibleTrees(TreeError):
    def __init__(self, reasons):
        self.reasons = list(reasons)
        super().__init__("trees are not order-compatible: " + "; ".join(self.reasons))


class UnorderableValueKind(TreeError):
    def __init__(self, kind):
        self.kind = kind
        super().__init__(f"values of kind {kind!r} have no order")


# -- io -------------------------------------------------------------------

class DocumentSyntaxError(InputError):
    def __init__(self, msg, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{msg}{where}")


class SchemaError(InputError):
    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class SignalTableError(InputError):
    pass


class UnknownItem(TreeError):
    def __init__(self, item):
        self.item = item
        super().__init__(f"item {item!r} is not in the instrument vocabulary")


class ScaleViolation(TreeError):
    def __init__(self, raw, lo, hi):
        self.raw = raw
        super().__init__(f"raw value {raw!r} outside [{lo}, {hi}]")
