"""Predicate-logic AST (terms, atoms, rules, rule programs) and unification.

Rules have the shape ``head :- a1, ..., am.``; every argument is a flat term
(a variable or a constant).  The only nested form is the counting aggregate
``count(r_i(X), C)``, which is modelled by :class:`CountAtom`.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from enum import Enum
from typing import Union

VARIABLE_RE = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")
CONSTANT_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
PREDICATE_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
RULE_REF_RE = re.compile(r"r(0|[1-9][0-9]*)\Z")

TARGET = "target"
COUNT = "count"

# Predicates resolved against the fact base.
BASE_PREDICATES = {"object": 1, "attribute": 3, "relation": 3}
# same_<type>(x, y): distinct objects sharing the value of attribute <type>.
SAME_ATTRIBUTE = {
    "same_size": "size",
    "same_shape": "shape",
    "same_color": "color",
    "same_material": "material",
}
# Comparison builtins over ground constants.
COMPARISONS = {"same": 2, "greater_than": 2, "lesser_than": 2}

ARITY: dict[str, int] = {
    **BASE_PREDICATES,
    **{name: 2 for name in SAME_ATTRIBUTE},
    **COMPARISONS,
}


class LogicError(ValueError):
    """Raised when a term, atom, rule or program violates its invariants."""


class InvalidProgram(LogicError):
    pass


class SubstitutionConflict(LogicError):
    pass


class UnknownPredicate(LookupError):
    pass


@dataclass(frozen=True, slots=True)
class Variable:
    name: str

    def __post_init__(self):
        if not isinstance(self.name, str) or not VARIABLE_RE.match(self.name):
            raise LogicError(f"invalid variable name {self.name!r}")

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Constant:
    value: str | int

    def __post_init__(self):
        v = self.value
        if isinstance(v, bool):
            raise LogicError("booleans are not constants")
        if isinstance(v, int):
            if v < 0:
                raise LogicError(f"negative integer constant {v}")
        elif not isinstance(v, str) or not CONSTANT_RE.match(v):
            raise LogicError(f"invalid constant {v!r}")

    def __str__(self):
        return str(self.value)


Term = Union[Variable, Constant]


def term(value: str | int | Variable | Constant) -> Term:
    """Build a term from a Python value: uppercase names are variables,
    digit strings and ints are integer constants, anything else a word."""
    if isinstance(value, (Variable, Constant)):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Constant(value)
    if isinstance(value, str):
        if value[:1].isupper():
            return Variable(value)
        if value.isdigit():
            return Constant(int(value))
        return Constant(value)
    raise LogicError(f"cannot build a term from {value!r}")


def rule_ref_index(predicate: str) -> int | None:
    m = RULE_REF_RE.match(predicate)
    return int(m.group(1)) if m else None


@dataclass(frozen=True, slots=True)
class Atom:
    predicate: str
    args: tuple[Term, ...]

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        if not PREDICATE_RE.match(self.predicate):
            raise LogicError(f"invalid predicate symbol {self.predicate!r}")
        if self.predicate == COUNT:
            raise LogicError("count atoms must be built as CountAtom")
        for a in self.args:
            if not isinstance(a, (Variable, Constant)):
                raise LogicError(f"argument {a!r} of {self.predicate} is not a flat term")
        expected = self.expected_arity()
        if expected is not None and len(self.args) != expected:
            raise LogicError(
                f"{self.predicate}/{len(self.args)}: expected arity {expected}"
            )
        if self.predicate == TARGET and len(self.args) > 1:
            raise LogicError("target takes zero or one argument")

    def expected_arity(self) -> int | None:
        if self.predicate in ARITY:
            return ARITY[self.predicate]
        if rule_ref_index(self.predicate) is not None:
            return 1
        return None

    @property
    def rule_index(self) -> int | None:
        """Index ``i`` for a rule reference ``r_i(...)``, otherwise None."""
        return rule_ref_index(self.predicate)

    def variables(self) -> Iterator[Variable]:
        for a in self.args:
            if isinstance(a, Variable):
                yield a

    def is_ground(self) -> bool:
        return all(isinstance(a, Constant) for a in self.args)

    def __str__(self):
        if not self.args and self.predicate == TARGET:
            return TARGET
        return f"{self.predicate}({', '.join(map(str, self.args))})"


@dataclass(frozen=True, slots=True)
class CountAtom:
    """``count(r_i(X), C)``: C is the number of solutions of rule i."""

    inner: Atom
    result: Term

    def __post_init__(self):
        if self.inner.rule_index is None:
            raise LogicError("count must wrap a rule reference r_i(X)")
        if not isinstance(self.inner.args[0], Variable):
            raise LogicError("count must wrap a rule reference with a variable argument")
        if not isinstance(self.result, (Variable, Constant)):
            raise LogicError(f"count result {self.result!r} is not a term")

    predicate = COUNT

    @property
    def args(self) -> tuple[Term, ...]:
        return (*self.inner.args, self.result)

    def variables(self) -> Iterator[Variable]:
        for a in self.args:
            if isinstance(a, Variable):
                yield a

    def is_ground(self) -> bool:
        return isinstance(self.result, Constant)

    def __str__(self):
        return f"count({self.inner}, {self.result})"


BodyAtom = Union[Atom, CountAtom]


def referenced_rules(atom: BodyAtom) -> int | None:
    if isinstance(atom, CountAtom):
        return atom.inner.rule_index
    return atom.rule_index


@dataclass(frozen=True, slots=True)
class Rule:
    head: Atom
    body: tuple[BodyAtom, ...]

    def __post_init__(self):
        if not isinstance(self.body, tuple):
            object.__setattr__(self, "body", tuple(self.body))
        if not self.body:
            raise LogicError(f"rule for {self.head} has an empty body")
        if self.head.predicate != TARGET:
            if self.head.rule_index is None:
                raise LogicError(f"rule head must be r_i(..) or target, got {self.head}")
        for atom in self.body:
            if isinstance(atom, Atom) and atom.predicate == TARGET:
                raise LogicError("target cannot occur in a rule body")
        # The variable inside count(r_i(X), C) is local to the aggregate.
        bound = set()
        for atom in self.body:
            if isinstance(atom, CountAtom):
                if isinstance(atom.result, Variable):
                    bound.add(atom.result)
            else:
                bound.update(atom.variables())
        for v in self.head.variables():
            if v not in bound:
                raise LogicError(f"head variable {v} of {self.head} does not occur in the body")

    @property
    def index(self) -> int | None:
        return self.head.rule_index

    def references(self) -> Iterator[int]:
        for atom in self.body:
            j = referenced_rules(atom)
            if j is not None:
                yield j

    def __str__(self):
        return f"{self.head} :- {', '.join(map(str, self.body))}."


class AnswerKind(Enum):
    BOOLEAN = "boolean"
    NUMERIC = "numeric"
    ATTRIBUTE_QUERY = "attribute_query"


@dataclass(frozen=True, slots=True)
class RuleProgram:
    """Ordered rules r0..rn (clauses of one index are adjacent and act as a
    disjunction) followed by exactly one ``target`` rule."""

    rules: tuple[Rule, ...]
    answer_kind: AnswerKind

    def __post_init__(self):
        if not isinstance(self.rules, tuple):
            object.__setattr__(self, "rules", tuple(self.rules))
        if not self.rules:
            raise InvalidProgram("empty rule program")
        if not isinstance(self.answer_kind, AnswerKind):
            raise InvalidProgram(f"bad answer kind {self.answer_kind!r}")
        *body_rules, target = self.rules
        if target.head.predicate != TARGET:
            raise InvalidProgram("the last rule must be the target rule")
        current = -1
        for rule in body_rules:
            i = rule.index
            if i is None:
                raise InvalidProgram("only the last rule may have head target")
            if i == current + 1:
                current = i
            elif i != current:
                raise InvalidProgram(f"rule index r{i} out of order after r{current}")
            for j in rule.references():
                if j >= i:
                    raise InvalidProgram(f"r{i} references r{j}: not stratified")
        for j in target.references():
            if j > current:
                raise InvalidProgram(f"target references undefined rule r{j}")
        boolean = len(target.head.args) == 0
        if boolean != (self.answer_kind is AnswerKind.BOOLEAN):
            raise InvalidProgram(
                f"answer kind {self.answer_kind.value} does not match target arity"
            )

    @property
    def rule_count(self) -> int:
        """Number of distinct rule indices, excluding the target."""
        if len(self.rules) == 1:
            return 0
        return self.rules[-2].index + 1

    @property
    def target(self) -> Rule:
        return self.rules[-1]

    def clauses(self, i: int) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.index == i)

    def __str__(self):
        return "\n".join(str(r) for r in self.rules)


class Substitution(Mapping):
    """An idempotent map from variables to terms."""

    __slots__ = ("_bindings",)

    def __init__(self, bindings: Mapping[Variable, Term] | Iterable | None = None):
        b = dict(bindings or {})
        for k, v in b.items():
            if not isinstance(k, Variable) or not isinstance(v, (Variable, Constant)):
                raise LogicError(f"bad binding {k!r} -> {v!r}")
            if k == v:
                raise LogicError(f"variable {k} bound to itself")
        for v in b.values():
            if v in b:
                raise LogicError(f"binding chain through {v}: substitution is not idempotent")
        self._bindings = b

    def __getitem__(self, key):
        return self._bindings[key]

    def __iter__(self):
        return iter(self._bindings)

    def __len__(self):
        return len(self._bindings)

    def __hash__(self):
        return hash(frozenset(self._bindings.items()))

    def __repr__(self):
        inner = ", ".join(f"{k}↦{v}" for k, v in self._bindings.items())
        return "{" + inner + "}"

    def term(self, t: Term) -> Term:
        return self._bindings.get(t, t) if isinstance(t, Variable) else t


EMPTY = Substitution()


def apply(s: Mapping[Variable, Term], atom):
    """Replace every bound variable in ``atom`` (an Atom, CountAtom or Rule)."""
    if isinstance(atom, Atom):
        if not s:
            return atom
        return Atom(atom.predicate, tuple(s.get(a, a) for a in atom.args))
    if isinstance(atom, CountAtom):
        return CountAtom(apply(s, atom.inner), s.get(atom.result, atom.result))
    if isinstance(atom, Rule):
        return Rule(apply(s, atom.head), tuple(apply(s, a) for a in atom.body))
    raise TypeError(f"cannot apply a substitution to {atom!r}")


def _signature(atom):
    if isinstance(atom, CountAtom):
        return (COUNT, atom.inner.predicate, len(atom.args))
    return (atom.predicate, len(atom.args))


def unify(a: BodyAtom, b: BodyAtom) -> Substitution | None:
    """Most general unifier of two atoms, or None when they clash."""
    if type(a) is not type(b) or _signature(a) != _signature(b):
        return None
    bindings: dict[Variable, Term] = {}

    def walk(t):
        while isinstance(t, Variable) and t in bindings:
            t = bindings[t]
        return t

    for x, y in zip(a.args, b.args):
        x, y = walk(x), walk(y)
        if x == y:
            continue
        if isinstance(x, Variable):
            bindings[x] = y
        elif isinstance(y, Variable):
            bindings[y] = x
        else:
            return None
    # No compound terms, so walking never loops and needs no occurs check.
    return Substitution({v: walk(v) for v in bindings if walk(v) != v})


def compose(s1: Mapping[Variable, Term], s2: Mapping[Variable, Term]) -> Substitution:
    """Substitution equivalent to applying ``s1`` and then ``s2``.

    Raises SubstitutionConflict when a variable bound by both would resolve
    to two distinct constants, or when the result cannot be idempotent.
    """
    out: dict[Variable, Term] = {}
    for k, v in s1.items():
        resolved = s2.get(v, v)
        if k in s2:
            other = s2[k]
            if (
                isinstance(resolved, Constant)
                and isinstance(other, Constant)
                and resolved != other
            ):
                raise SubstitutionConflict(f"{k} resolves to both {resolved} and {other}")
        if resolved != k:
            out[k] = resolved
    for k, v in s2.items():
        if k not in s1:
            out[k] = v
    try:
        return Substitution(out)
    except LogicError as exc:
        raise SubstitutionConflict(str(exc)) from None


def body_variables(atoms: Iterable[BodyAtom]) -> list[Variable]:
    """Variables in left-to-right argument order, first occurrence only."""
    seen: dict[Variable, None] = {}
    for atom in atoms:
        for v in atom.variables():
            seen.setdefault(v)
    return list(seen)
