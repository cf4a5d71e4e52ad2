"""Compile CLEVR functional programs into stratified rule programs.

Object-set branches accumulate body atoms over one output variable and are
closed into named rules only when an answer operation needs them (count,
exist, query, comparison operands).  The first variable of every closed body
is its head variable, which is what lets the sentence codec recover heads.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import count as _counter

from .logic import (
    AnswerKind,
    Atom,
    Constant,
    CountAtom,
    LogicError,
    Rule,
    RuleProgram,
    Substitution,
    Variable,
    apply,
)
from .program import (
    FunctionalProgram,
    MalformedProgram,
    OBJECTS,
    attribute_type,
    check_program,
)

# Target rule shapes; the sentence codec gives each one a token.
GREATER = "greater"
LESSER = "lesser"
SAME_INTEGER = "same_integer"
EXIST = "exist"
COUNT = "count"
QUERY = "query"
EQUAL_ATTRIBUTE = "equal_attribute"

NUMERIC_SHAPES = {GREATER: "greater_than", LESSER: "lesser_than", SAME_INTEGER: "same"}
SHAPE_OPERANDS = {
    GREATER: 2, LESSER: 2, SAME_INTEGER: 2, COUNT: 1,
    EXIST: 1, QUERY: 1, EQUAL_ATTRIBUTE: 2,
}
COUNT_OPERAND_SHAPES = {GREATER, LESSER, SAME_INTEGER, COUNT}

_COMPARISON_SHAPE = {"greater_than": GREATER, "less_than": LESSER, "equal_integer": SAME_INTEGER}


def rule_atom(index: int, arg) -> Atom:
    return Atom(f"r{index}", (arg,))


def count_rule(index: int, inner: Rule) -> Rule:
    """``r_index(C) :- count(r_j(X), C).`` over the rule ``inner``."""
    c = Variable("C")
    return Rule(rule_atom(index, c), (CountAtom(inner.head, c),))


def is_count_rule(rule: Rule) -> bool:
    return len(rule.body) == 1 and isinstance(rule.body[0], CountAtom)


def answer_kind(shape: str) -> AnswerKind:
    if shape == COUNT:
        return AnswerKind.NUMERIC
    if shape == QUERY:
        return AnswerKind.ATTRIBUTE_QUERY
    return AnswerKind.BOOLEAN


def target_rule(shape: str, operands: list[Rule], attr: str | None = None) -> Rule:
    """Build the target rule of ``shape`` over operand rules (their first clause)."""
    if len(operands) != SHAPE_OPERANDS[shape]:
        raise LogicError(f"{shape} target needs {SHAPE_OPERANDS[shape]} operands")
    heads = [op.head for op in operands]
    idx = [op.index for op in operands]
    target = "target"
    if shape in NUMERIC_SHAPES:
        c1, c2 = Variable("C1"), Variable("C2")
        return Rule(
            Atom(target, ()),
            (rule_atom(idx[0], c1), rule_atom(idx[1], c2), Atom(NUMERIC_SHAPES[shape], (c1, c2))),
        )
    if shape == COUNT:
        c = Variable("C")
        return Rule(Atom(target, (c,)), (rule_atom(idx[0], c),))
    if shape == EXIST:
        return Rule(Atom(target, ()), (heads[0],))
    if shape == QUERY:
        x, a = Variable("X"), Variable("A")
        return Rule(
            Atom(target, (a,)),
            (rule_atom(idx[0], x), Atom("attribute", (x, Constant(attr), a))),
        )
    if shape == EQUAL_ATTRIBUTE:
        x, y = Variable("X"), Variable("Y")
        a1, a2 = Variable("A1"), Variable("A2")
        t = Constant(attr)
        return Rule(
            Atom(target, ()),
            (
                rule_atom(idx[0], x),
                rule_atom(idx[1], y),
                Atom("attribute", (x, t, a1)),
                Atom("attribute", (y, t, a2)),
                Atom("same", (a1, a2)),
            ),
        )
    raise LogicError(f"unknown target shape {shape!r}")


def _variable_names():
    yield from "WXYZ"
    for n in _counter(1):
        for letter in "WXYZ":
            yield f"{letter}{n}"


@dataclass(frozen=True)
class _Branch:
    var: Variable
    atoms: tuple[Atom, ...]


class _Compiler:
    def __init__(self, fp: FunctionalProgram):
        self.fp = fp
        self.rules: list[Rule] = []
        self._names = _variable_names()
        self._next_index = 0

    def fresh(self) -> Variable:
        return Variable(next(self._names))

    def emit(self, clauses: list[tuple[Variable, tuple[Atom, ...]]]) -> Rule:
        i = self._next_index
        self._next_index += 1
        rules = [Rule(rule_atom(i, v), body) for v, body in clauses]
        self.rules.extend(rules)
        return rules[0]

    def value(self, node, i: int) -> Constant:
        try:
            return Constant(node.value_inputs[0])
        except LogicError:
            raise MalformedProgram(
                f"node {i} ({node.op}) has invalid value {node.value_inputs[0]!r}"
            ) from None

    def objects(self, i: int) -> _Branch:
        """Fresh branch for the object set produced by node ``i``."""
        node = self.fp.nodes[i]
        op = node.op
        if op == "scene":
            return _Branch(self.fresh(), ())
        if op == "unique":
            return self.objects(node.inputs[0])
        if op.startswith("filter_"):
            b = self.objects(node.inputs[0])
            atom = Atom("attribute", (b.var, Constant(attribute_type(op)), self.value(node, i)))
            return _Branch(b.var, b.atoms + (atom,))
        if op == "relate":
            b = self.objects(node.inputs[0])
            v = self.fresh()
            return _Branch(v, (Atom("relation", (v, b.var, self.value(node, i))),) + b.atoms)
        if op.startswith("same_"):
            b = self.objects(node.inputs[0])
            v = self.fresh()
            return _Branch(v, (Atom(op, (v, b.var)),) + b.atoms)
        if op == "intersect":
            a = self.objects(node.inputs[0])
            b = self.objects(node.inputs[1])
            rename = Substitution({b.var: a.var})
            return _Branch(a.var, a.atoms + tuple(apply(rename, x) for x in b.atoms))
        if op == "union":
            a = self.objects(node.inputs[0])
            b = self.objects(node.inputs[1])
            rename = Substitution({b.var: a.var})
            b_atoms = tuple(apply(rename, x) for x in b.atoms)
            rule = self.emit([(a.var, self._body(a.var, a.atoms)), (a.var, self._body(a.var, b_atoms))])
            return _Branch(a.var, (rule.head,))
        raise MalformedProgram(f"node {i} ({op}) does not produce an object set")

    @staticmethod
    def _body(var: Variable, atoms: tuple[Atom, ...]) -> tuple[Atom, ...]:
        return atoms if atoms else (Atom("object", (var,)),)

    def close(self, i: int) -> Rule:
        b = self.objects(i)
        if len(b.atoms) == 1 and b.atoms[0].rule_index is not None and b.atoms[0].args == (b.var,):
            # A bare union result is already a named rule.
            for rule in self.rules:
                if rule.index == b.atoms[0].rule_index:
                    return rule
        return self.emit([(b.var, self._body(b.var, b.atoms))])

    def count(self, i: int) -> Rule:
        node = self.fp.nodes[i]
        if node.op != "count":
            raise MalformedProgram(f"node {i} ({node.op}) does not produce a count")
        inner = self.close(node.inputs[0])
        rule = count_rule(self._next_index, inner)
        self._next_index += 1
        self.rules.append(rule)
        return rule

    def compile(self) -> RuleProgram:
        kinds = check_program(self.fp)
        if kinds[-1] == OBJECTS:
            raise MalformedProgram("the output node must answer the question, not yield objects")
        node = self.fp.output
        op = node.op
        if op == "count":
            shape, operands, attr = COUNT, [self.count(len(self.fp.nodes) - 1)], None
        elif op == "exist":
            shape, operands, attr = EXIST, [self.close(node.inputs[0])], None
        elif op in _COMPARISON_SHAPE:
            shape, attr = _COMPARISON_SHAPE[op], None
            operands = [self.count(node.inputs[0]), self.count(node.inputs[1])]
        elif op.startswith("query_"):
            shape, attr = QUERY, attribute_type(op)
            operands = [self.close(node.inputs[0])]
        elif op.startswith("equal_"):
            shape, attr = EQUAL_ATTRIBUTE, attribute_type(op)
            operands = [self.close(node.inputs[0]), self.close(node.inputs[1])]
        else:
            raise MalformedProgram(f"unexpected output operation {op!r}")
        target = target_rule(shape, operands, attr)
        return RuleProgram(tuple(self.rules) + (target,), answer_kind(shape))


def compile_program(fp: FunctionalProgram) -> RuleProgram:
    """Rule program whose target answers the question ``fp`` encodes."""
    return _Compiler(fp).compile()
