"""Direct set-semantics executor for functional programs.

This is the ground-truth oracle for the rule pipeline: it never builds atoms
or rules, it just runs each operation over explicit sets of object ids.
"""

from __future__ import annotations

from collections import defaultdict

from .inference import Answer
from .program import FunctionalProgram, attribute_type, check_program
from .scene import SceneGraph


class OracleError(Exception):
    pass


class IllPosedQuestion(OracleError):
    """The program asks for a unique object that does not exist."""


def _single(objs: frozenset, i: int, op: str) -> int:
    if len(objs) != 1:
        raise IllPosedQuestion(f"node {i} ({op}) needs exactly one object, got {len(objs)}")
    return next(iter(objs))


def execute(scene: SceneGraph, fp: FunctionalProgram) -> list:
    """Value of every node: frozensets of ids, ints, bools or attribute words."""
    check_program(fp)
    attrs = {o.id: o.attributes for o in scene.objects}
    related = defaultdict(set)  # (relation, anchor) -> objects in that relation to anchor
    for a, b, r in scene.relations:
        related[(r, b)].add(a)
    everything = frozenset(attrs)

    values: list = []
    for i, node in enumerate(fp.nodes):
        op = node.op
        args = [values[j] for j in node.inputs]
        if op == "scene":
            out = everything
        elif op == "unique":
            _single(args[0], i, op)
            out = args[0]
        elif op.startswith("filter_"):
            t, v = attribute_type(op), node.value_inputs[0]
            out = frozenset(o for o in args[0] if attrs[o].get(t) == v)
        elif op == "relate":
            r = node.value_inputs[0]
            out = frozenset().union(*(related[(r, o)] for o in args[0]))
        elif op.startswith("same_"):
            t = attribute_type(op)
            out = frozenset(
                o
                for o in everything
                for ref in args[0]
                if o != ref and attrs[o].get(t) is not None and attrs[o].get(t) == attrs[ref].get(t)
            )
        elif op == "union":
            out = args[0] | args[1]
        elif op == "intersect":
            out = args[0] & args[1]
        elif op == "count":
            out = len(args[0])
        elif op == "exist":
            out = bool(args[0])
        elif op == "equal_integer":
            out = args[0] == args[1]
        elif op == "greater_than":
            out = args[0] > args[1]
        elif op == "less_than":
            out = args[0] < args[1]
        elif op.startswith("equal_"):
            t = attribute_type(op)
            a, b = _single(args[0], i, op), _single(args[1], i, op)
            out = attrs[a].get(t) is not None and attrs[a].get(t) == attrs[b].get(t)
        elif op.startswith("query_"):
            obj = _single(args[0], i, op)
            out = attrs[obj].get(attribute_type(op))
            if out is None:
                raise IllPosedQuestion(f"object {obj} has no {attribute_type(op)}")
        else:  # pragma: no cover - check_program rejects unknown ops
            raise OracleError(f"unhandled operation {op}")
        values.append(out)
    return values


def oracle_execute(scene: SceneGraph, fp: FunctionalProgram) -> Answer:
    """Answer obtained by running ``fp`` directly on ``scene``."""
    out = execute(scene, fp)[-1]
    if isinstance(out, bool):
        return Answer.boolean(out)
    if isinstance(out, int):
        return Answer.num(out)
    if isinstance(out, str):
        return Answer.attr(out)
    raise OracleError("program output is an object set, not an answer")
