"""CLEVR functional programs: node lists, operation signatures, families."""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from enum import Enum

OBJECTS = "objects"
INTEGER = "integer"
BOOLEAN = "boolean"
ATTRIBUTE = "attribute"

ATTRIBUTE_TYPES = ("size", "color", "material", "shape")

# op -> (input kinds, number of value inputs, output kind)
SIGNATURES: dict[str, tuple[tuple[str, ...], int, str]] = {
    "scene": ((), 0, OBJECTS),
    "unique": ((OBJECTS,), 0, OBJECTS),
    "relate": ((OBJECTS,), 1, OBJECTS),
    "union": ((OBJECTS, OBJECTS), 0, OBJECTS),
    "intersect": ((OBJECTS, OBJECTS), 0, OBJECTS),
    "count": ((OBJECTS,), 0, INTEGER),
    "exist": ((OBJECTS,), 0, BOOLEAN),
    "equal_integer": ((INTEGER, INTEGER), 0, BOOLEAN),
    "greater_than": ((INTEGER, INTEGER), 0, BOOLEAN),
    "less_than": ((INTEGER, INTEGER), 0, BOOLEAN),
}
for _t in ATTRIBUTE_TYPES:
    SIGNATURES[f"filter_{_t}"] = ((OBJECTS,), 1, OBJECTS)
    SIGNATURES[f"same_{_t}"] = ((OBJECTS,), 0, OBJECTS)
    SIGNATURES[f"equal_{_t}"] = ((OBJECTS, OBJECTS), 0, BOOLEAN)
    SIGNATURES[f"query_{_t}"] = ((OBJECTS,), 0, ATTRIBUTE)

_BRACKETED = re.compile(r"([a-z_]+)\[([^\]]*)\]\Z")


class ProgramError(ValueError):
    pass


class UnsupportedOperation(ProgramError):
    pass


class MalformedProgram(ProgramError):
    pass


class QuestionFamily(Enum):
    COUNT = "Count"
    EXIST = "Exist"
    COMPARE_NUMBER = "Compare Number"
    COMPARE_ATTRIBUTE = "Compare Attribute"
    QUERY_ATTRIBUTE = "Query Attribute"

    @classmethod
    def parse(cls, text: str) -> QuestionFamily:
        key = text.strip().lower().replace("_", " ").replace("-", " ")
        for fam in cls:
            if fam.value.lower() == key or fam.name.lower().replace("_", " ") == key:
                return fam
        raise ValueError(f"unknown question family {text!r}")


@dataclass(frozen=True)
class ProgramNode:
    op: str
    inputs: tuple[int, ...] = ()
    value_inputs: tuple[str, ...] = ()

    def __str__(self):
        vals = f"[{','.join(self.value_inputs)}]" if self.value_inputs else ""
        return f"{self.op}{vals}"


@dataclass(frozen=True)
class FunctionalProgram:
    nodes: tuple[ProgramNode, ...]

    def __post_init__(self):
        if not isinstance(self.nodes, tuple):
            object.__setattr__(self, "nodes", tuple(self.nodes))
        if not self.nodes:
            raise MalformedProgram("empty program")
        for i, node in enumerate(self.nodes):
            for j in node.inputs:
                if not 0 <= j < i:
                    raise MalformedProgram(f"node {i} ({node.op}) has input {j}: not an earlier node")

    @property
    def output(self) -> ProgramNode:
        return self.nodes[-1]

    @classmethod
    def from_clevr(cls, program: Iterable[Mapping]) -> FunctionalProgram:
        """Read the ``program`` array of a CLEVR question.

        Accepts both ``function`` and the older ``type`` key, ``value_inputs``
        or ``side_inputs``, and bracketed names such as ``filter_color[red]``.
        """
        nodes = []
        for i, raw in enumerate(program):
            if not isinstance(raw, Mapping):
                raise MalformedProgram(f"program node {i} is not an object")
            op = raw.get("function", raw.get("type"))
            if not isinstance(op, str):
                raise MalformedProgram(f"program node {i} has no function name")
            values = raw.get("value_inputs", raw.get("side_inputs", [])) or []
            m = _BRACKETED.match(op)
            if m:
                op = m.group(1)
                if m.group(2) and not values:
                    values = [m.group(2)]
            inputs = raw.get("inputs", [])
            if not isinstance(inputs, list) or not all(
                isinstance(j, int) and not isinstance(j, bool) for j in inputs
            ):
                raise MalformedProgram(f"program node {i} has invalid inputs {inputs!r}")
            if not isinstance(values, list) or not all(isinstance(v, str) for v in values):
                raise MalformedProgram(f"program node {i} has invalid value inputs {values!r}")
            nodes.append(ProgramNode(op, tuple(inputs), tuple(values)))
        return cls(tuple(nodes))

    def to_clevr(self) -> list[dict]:
        return [
            {"function": n.op, "inputs": list(n.inputs), "value_inputs": list(n.value_inputs)}
            for n in self.nodes
        ]

    def depth(self) -> int:
        """Length of the longest input chain ending at the output node."""
        d: list[int] = []
        for node in self.nodes:
            d.append(1 + max((d[j] for j in node.inputs), default=0))
        return d[-1]

    def __str__(self):
        return " ".join(str(n) for n in self.nodes)


def signature(node: ProgramNode) -> tuple[tuple[str, ...], int, str]:
    try:
        return SIGNATURES[node.op]
    except KeyError:
        raise UnsupportedOperation(f"unsupported operation {node.op!r}") from None


def check_program(fp: FunctionalProgram) -> list[str]:
    """Type-check every node; returns the output kind of each node."""
    kinds: list[str] = []
    for i, node in enumerate(fp.nodes):
        in_kinds, n_values, out = signature(node)
        if len(node.inputs) != len(in_kinds):
            raise MalformedProgram(
                f"node {i} ({node.op}) takes {len(in_kinds)} inputs, got {len(node.inputs)}"
            )
        if len(node.value_inputs) != n_values:
            raise MalformedProgram(
                f"node {i} ({node.op}) takes {n_values} value inputs, got {len(node.value_inputs)}"
            )
        for j, want in zip(node.inputs, in_kinds):
            if kinds[j] != want:
                raise MalformedProgram(
                    f"node {i} ({node.op}) expects {want} from node {j}, which yields {kinds[j]}"
                )
        kinds.append(out)
    return kinds


def attribute_type(op: str) -> str:
    """``filter_color`` -> ``color``."""
    return op.split("_", 1)[1]


def classify(fp: FunctionalProgram) -> QuestionFamily:
    op = fp.output.op
    if op == "count":
        return QuestionFamily.COUNT
    if op == "exist":
        return QuestionFamily.EXIST
    if op in ("equal_integer", "greater_than", "less_than"):
        return QuestionFamily.COMPARE_NUMBER
    if op.startswith("equal_") and attribute_type(op) in ATTRIBUTE_TYPES:
        return QuestionFamily.COMPARE_ATTRIBUTE
    if op.startswith("query_") and attribute_type(op) in ATTRIBUTE_TYPES:
        return QuestionFamily.QUERY_ATTRIBUTE
    raise UnsupportedOperation(f"{op!r} is not a question-answering output operation")
