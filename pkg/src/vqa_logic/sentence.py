"""Target-sentence codec: one backslash-delimited string per rule program.

Example (the count comparison ``r1 > r3``)::

    attribute(W, size, large),attribute(W, color, green)\\C1\\...\\C2\\>\\

Segments are BODY (clauses separated by ``;``, atoms by ``,``), ``Cn``
(count the previous rule), and a final operator.  See docs/sentence-grammar.md.
"""

from __future__ import annotations

import re

from .compiler import (
    COUNT,
    COUNT_OPERAND_SHAPES,
    EQUAL_ATTRIBUTE,
    EXIST,
    GREATER,
    LESSER,
    QUERY,
    SAME_INTEGER,
    SHAPE_OPERANDS,
    answer_kind,
    count_rule,
    is_count_rule,
    rule_atom,
    target_rule,
)
from .logic import (
    ARITY,
    COUNT as COUNT_PREDICATE,
    TARGET,
    Atom,
    Constant,
    LogicError,
    Rule,
    RuleProgram,
    Variable,
    body_variables,
    rule_ref_index,
)

_FIXED_TOKENS = {">": GREATER, "<": LESSER, "=#": SAME_INTEGER, "E": EXIST, "C": COUNT}
_SHAPE_TOKENS = {shape: tok for tok, shape in _FIXED_TOKENS.items()}
_COUNT_SEGMENT = re.compile(r"C([1-9][0-9]*)\Z")
_QUERY_SEGMENT = re.compile(r"Q\(\s*([a-z][a-z0-9_]*)\s*\)\Z")
_EQUAL_SEGMENT = re.compile(r"=([a-z][a-z0-9_]*)\Z")
_TOKEN = re.compile(
    r"\s*(?:(?P<int>[0-9]+)|(?P<var>[A-Z][A-Za-z0-9_]*)|(?P<name>[a-z][a-z0-9_]*)|(?P<punct>[(),;]))"
)


class ParseError(ValueError):
    pass


class UnencodableProgram(ValueError):
    pass


# --- serialize --------------------------------------------------------------


def _render_atom(atom: Atom) -> str:
    return f"{atom.predicate}({', '.join(map(str, atom.args))})"


def _operands(rules: list[list[Rule]]) -> list[int]:
    """Indices of rules not consumed by any later rule."""
    consumed = set()
    for clauses in rules:
        for rule in clauses:
            consumed.update(rule.references())
    return [i for i in range(len(rules)) if i not in consumed]


def _clause_from_body(index: int, body: tuple[Atom, ...]) -> Rule:
    vs = body_variables(body)
    if not vs:
        raise ParseError(f"r{index}: body has no variable to use as head")
    return Rule(rule_atom(index, vs[0]), body)


def serialize(rp: RuleProgram) -> str:
    """Encode ``rp`` as a target sentence.

    Raises UnencodableProgram when some rule is not of a shape the sentence
    grammar can express (so that parsing the output would not give ``rp``).
    """
    groups = [list(rp.clauses(i)) for i in range(rp.rule_count)]
    segments = []
    ordinal = 0
    for i, clauses in enumerate(groups):
        if len(clauses) == 1 and is_count_rule(clauses[0]):
            if i == 0 or is_count_rule(groups[i - 1][0]):
                raise UnencodableProgram(f"r{i} does not count a body rule directly before it")
            if clauses[0] != count_rule(i, groups[i - 1][0]):
                raise UnencodableProgram(f"r{i} is not a plain count of r{i - 1}")
            ordinal += 1
            segments.append(f"C{ordinal}")
            continue
        rendered = []
        for clause in clauses:
            for atom in clause.body:
                if not isinstance(atom, Atom):
                    raise UnencodableProgram(f"r{i} mixes count with other atoms")
            try:
                expected = _clause_from_body(i, clause.body)
            except ParseError as exc:
                raise UnencodableProgram(str(exc)) from None
            if expected != clause:
                raise UnencodableProgram(f"head of {clause} is not the first body variable")
            rendered.append(",".join(_render_atom(a) for a in clause.body))
        segments.append(";".join(rendered))

    operands = _operands(groups)
    heads = [groups[j][0] for j in operands]
    counting = [is_count_rule(groups[j][0]) for j in operands]
    token = None
    for shape, n in SHAPE_OPERANDS.items():
        if n != len(operands) or answer_kind(shape) != rp.answer_kind:
            continue
        if any(c != (shape in COUNT_OPERAND_SHAPES) for c in counting):
            continue
        attr = None
        if shape in (QUERY, EQUAL_ATTRIBUTE):
            attr = _attribute_of(rp.target)
            if attr is None:
                continue
        try:
            candidate = target_rule(shape, heads, attr)
        except LogicError:
            continue
        if candidate == rp.target:
            token = _SHAPE_TOKENS.get(shape) or (f"Q({attr})" if shape == QUERY else f"={attr}")
            break
    if token is None:
        raise UnencodableProgram(f"target rule {rp.target} matches no operator")
    segments.append(token)
    return "".join(seg + "\\" for seg in segments)


def _attribute_of(target: Rule) -> str | None:
    for atom in target.body:
        if isinstance(atom, Atom) and atom.predicate == "attribute":
            t = atom.args[1]
            if isinstance(t, Constant) and isinstance(t.value, str):
                return t.value
    return None


# --- parse ------------------------------------------------------------------


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r} in {text!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    return tokens


class _BodyParser:
    """Recursive descent over ``clause (';' clause)*``."""

    def __init__(self, text: str, index: int):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.index = index

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def expect(self, value: str):
        kind, tok = self.peek()
        if tok != value or kind != "punct":
            raise ParseError(f"expected {value!r}, found {tok!r}")
        self.pos += 1

    def clauses(self) -> list[tuple[Atom, ...]]:
        out = [self.clause()]
        while self.peek()[1] == ";":
            self.pos += 1
            out.append(self.clause())
        if self.pos != len(self.tokens):
            raise ParseError(f"trailing input {self.peek()[1]!r}")
        return out

    def clause(self) -> tuple[Atom, ...]:
        atoms = [self.atom()]
        while self.peek()[1] == ",":
            self.pos += 1
            atoms.append(self.atom())
        return tuple(atoms)

    def atom(self) -> Atom:
        kind, name = self.peek()
        if kind != "name":
            raise ParseError(f"expected a predicate name, found {name!r}")
        self.pos += 1
        ref = rule_ref_index(name)
        if name in (TARGET, COUNT_PREDICATE):
            raise ParseError(f"{name} cannot appear in a body segment")
        if name not in ARITY and ref is None:
            raise ParseError(f"unknown predicate {name!r}")
        if ref is not None and ref >= self.index:
            raise ParseError(f"r{self.index} references r{ref}: not an earlier rule")
        self.expect("(")
        args = [self.term()]
        while self.peek()[1] == ",":
            self.pos += 1
            args.append(self.term())
        self.expect(")")
        expected = 1 if ref is not None else ARITY[name]
        if len(args) != expected:
            raise ParseError(f"{name}/{len(args)}: expected arity {expected}")
        return Atom(name, tuple(args))

    def term(self):
        kind, tok = self.peek()
        self.pos += 1
        if kind == "var":
            return Variable(tok)
        if kind == "int":
            return Constant(int(tok))
        if kind == "name":
            return Constant(tok)
        raise ParseError(f"expected a term, found {tok!r}")


def parse(text: str) -> RuleProgram:
    """Rebuild the rule program encoded by a target sentence."""
    if not isinstance(text, str):
        raise ParseError("sentence must be a string")
    stripped = text.strip()
    if not stripped:
        raise ParseError("empty sentence")
    if not stripped.endswith("\\"):
        raise ParseError("sentence must end with '\\'")
    segments = [s.strip() for s in stripped[:-1].split("\\")]
    if any(not s for s in segments):
        raise ParseError("empty segment")
    *rule_segments, op_segment = segments

    groups: list[list[Rule]] = []
    ordinal = 0
    for seg in rule_segments:
        i = len(groups)
        m = _COUNT_SEGMENT.match(seg)
        if m:
            ordinal += 1
            if int(m.group(1)) != ordinal:
                raise ParseError(f"count marker {seg} out of sequence (expected C{ordinal})")
            if not groups or is_count_rule(groups[-1][0]):
                raise ParseError(f"{seg} does not follow a body segment")
            groups.append([count_rule(i, groups[-1][0])])
            continue
        if _is_operator(seg):
            raise ParseError(f"operator {seg!r} before the end of the sentence")
        try:
            bodies = _BodyParser(seg, i).clauses()
            groups.append([_clause_from_body(i, body) for body in bodies])
        except LogicError as exc:
            raise ParseError(str(exc)) from None

    shape, attr = _operator(op_segment)
    operands = _operands(groups)
    if len(operands) != SHAPE_OPERANDS[shape]:
        raise ParseError(
            f"operator {op_segment!r} needs {SHAPE_OPERANDS[shape]} unconsumed rules, "
            f"found {len(operands)}"
        )
    heads = [groups[j][0] for j in operands]
    for head in heads:
        if is_count_rule(head) != (shape in COUNT_OPERAND_SHAPES):
            raise ParseError(f"operator {op_segment!r} cannot take r{head.index} as operand")
    try:
        target = target_rule(shape, heads, attr)
        return RuleProgram(
            tuple(r for clauses in groups for r in clauses) + (target,), answer_kind(shape)
        )
    except LogicError as exc:
        raise ParseError(str(exc)) from None


def _is_operator(seg: str) -> bool:
    return seg in _FIXED_TOKENS or bool(_QUERY_SEGMENT.match(seg) or _EQUAL_SEGMENT.match(seg))


def _operator(seg: str) -> tuple[str, str | None]:
    if seg in _FIXED_TOKENS:
        return _FIXED_TOKENS[seg], None
    m = _QUERY_SEGMENT.match(seg)
    if m:
        return QUERY, m.group(1)
    m = _EQUAL_SEGMENT.match(seg)
    if m:
        return EQUAL_ATTRIBUTE, m.group(1)
    raise ParseError(f"missing or unknown operator segment {seg!r}")
