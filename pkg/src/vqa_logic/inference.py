"""Bottom-up evaluation of rule programs against a scene's fact base.

Rules are evaluated in index order, which is a valid stratification: every
rule (including the one inside ``count``) only references earlier indices,
so their solution sets are complete before they are read.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Mapping
from dataclasses import dataclass

from .logic import (
    BASE_PREDICATES,
    COMPARISONS,
    SAME_ATTRIBUTE,
    AnswerKind,
    Atom,
    Constant,
    CountAtom,
    Rule,
    RuleProgram,
    UnknownPredicate,
    Variable,
    apply,
)
from .scene import FactBase

logger = logging.getLogger(__name__)

Env = dict  # Variable -> Constant


class EvaluationError(Exception):
    pass


class NonGroundBuiltin(EvaluationError):
    pass


class UnknownObject(EvaluationError):
    pass


@dataclass(frozen=True)
class Answer:
    """One of yes, no, a count, an attribute word, or null."""

    kind: str
    value: int | str | None = None

    YES_KIND = "yes"
    NO_KIND = "no"
    NUM_KIND = "num"
    ATTR_KIND = "attr"
    NULL_KIND = "null"

    @classmethod
    def num(cls, n: int) -> Answer:
        return cls(cls.NUM_KIND, int(n))

    @classmethod
    def attr(cls, word: str) -> Answer:
        return cls(cls.ATTR_KIND, word)

    @classmethod
    def boolean(cls, flag: bool) -> Answer:
        return YES if flag else NO

    @property
    def is_null(self) -> bool:
        return self.kind == self.NULL_KIND

    @property
    def text(self) -> str | None:
        """Normalized answer string as stored in CLEVR; None for null."""
        if self.kind in (self.YES_KIND, self.NO_KIND):
            return self.kind
        if self.kind == self.NULL_KIND:
            return None
        return str(self.value)

    def matches(self, expected: str) -> bool:
        return self.text is not None and self.text == str(expected).strip().lower()

    def __str__(self):
        return self.text if self.text is not None else "NULL"


YES = Answer(Answer.YES_KIND)
NO = Answer(Answer.NO_KIND)
NULL = Answer(Answer.NULL_KIND)


def _sort_key(row: tuple) -> tuple:
    return tuple((isinstance(v, str), v) for v in row)


@dataclass(frozen=True)
class SolutionSet:
    """Ground head arguments derivable for one rule (``index`` None = target)."""

    index: int | None
    rows: frozenset[tuple]

    @property
    def values(self) -> frozenset:
        return frozenset(r[0] for r in self.rows if r)

    def sorted_rows(self) -> list[tuple]:
        return sorted(self.rows, key=_sort_key)

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class TraceEntry:
    rules: tuple[Rule, ...]
    solutions: SolutionSet

    def __str__(self):
        shown = ", ".join(",".join(map(str, r)) if r else "true" for r in self.solutions.sorted_rows())
        text = "\n".join(str(r) for r in self.rules)
        return f"{text}\n    => {{{shown}}}"


def same_attribute(fb: FactBase, attribute_type: str, x, y) -> bool:
    """True iff x and y are distinct objects with equal ``attribute_type``."""
    for obj in (x, y):
        if obj not in fb.universe:
            raise UnknownObject(f"{obj!r} is not an object of this scene")
    if x == y:
        return False
    vx = fb.attribute_value(x, attribute_type)
    return vx is not None and vx == fb.attribute_value(y, attribute_type)


def _value(t, env: Env):
    if isinstance(t, Variable):
        c = env.get(t)
        return None if c is None else c.value
    return t.value


def _bind(args, values, env: Env) -> Env | None:
    """Extend ``env`` so that ``args`` match the ground ``values``."""
    out = env
    for a, v in zip(args, values):
        if isinstance(a, Variable):
            bound = out.get(a)
            if bound is None:
                if out is env:
                    out = dict(env)
                out[a] = Constant(v)
            elif bound.value != v:
                return None
        elif a.value != v:
            return None
    return out


def _compare(predicate: str, x, y) -> bool:
    if predicate == "same":
        return x == y
    if not (isinstance(x, int) and isinstance(y, int)):
        return False
    return x > y if predicate == "greater_than" else x < y


def _ready(atom, env: Env) -> bool:
    if isinstance(atom, Atom) and atom.predicate in COMPARISONS:
        return all(_value(a, env) is not None for a in atom.args)
    if isinstance(atom, Atom) and atom.predicate in SAME_ATTRIBUTE:
        return any(_value(a, env) is not None for a in atom.args)
    return True


def _select(atoms, env: Env) -> int | None:
    """Leftmost atom that can run now; unbound builtins wait for bindings."""
    for k, atom in enumerate(atoms):
        if _ready(atom, env):
            return k
    for k, atom in enumerate(atoms):
        if atom.predicate in SAME_ATTRIBUTE:
            return k
    return None


def _resolve(fb: FactBase, atom, prior: Mapping[int, SolutionSet], env: Env) -> Iterator[Env]:
    if isinstance(atom, CountAtom):
        j = atom.inner.rule_index
        if j not in prior:
            raise EvaluationError(f"count over unevaluated rule r{j}")
        env2 = _bind((atom.result,), (len(prior[j]),), env)
        if env2 is not None:
            yield env2
        return

    p = atom.predicate
    if p in BASE_PREDICATES:
        pattern = apply(env, atom)
        for fact in fb.facts_of(pattern):
            env2 = _bind(pattern.args, [a.value for a in fact.args], env)
            if env2 is not None:
                yield env2
        return
    j = atom.rule_index
    if j is not None:
        if j not in prior:
            raise EvaluationError(f"reference to unevaluated rule r{j}")
        for row in prior[j].sorted_rows():
            env2 = _bind(atom.args, row, env)
            if env2 is not None:
                yield env2
        return
    if p in COMPARISONS:
        x, y = (_value(a, env) for a in atom.args)
        if _compare(p, x, y):
            yield env
        return
    if p in SAME_ATTRIBUTE:
        t = SAME_ATTRIBUTE[p]
        x, y = (_value(a, env) for a in atom.args)
        objects = sorted(fb.universe)
        xs = [x] if x is not None else objects
        ys = [y] if y is not None else objects
        for a in xs:
            for b in ys:
                if same_attribute(fb, t, a, b):
                    env2 = _bind(atom.args, (a, b), env)
                    if env2 is not None:
                        yield env2
        return
    raise UnknownPredicate(f"unknown predicate {p}/{len(atom.args)}")


def solve(fb: FactBase, body, prior: Mapping[int, SolutionSet], env: Env | None = None) -> Iterator[Env]:
    """All variable bindings that satisfy every atom of ``body``."""
    env = {} if env is None else env
    if not body:
        yield env
        return
    k = _select(body, env)
    if k is None:
        pending = ", ".join(str(a) for a in body)
        raise NonGroundBuiltin(f"builtins never became ground: {pending}")
    rest = body[:k] + body[k + 1:]
    for env2 in _resolve(fb, body[k], prior, env):
        yield from solve(fb, rest, prior, env2)


def _eval_clauses(fb, clauses, prior, index) -> SolutionSet:
    rows = set()
    for clause in clauses:
        for env in solve(fb, clause.body, prior):
            row = tuple(_value(a, env) for a in clause.head.args)
            if any(v is None for v in row):
                raise NonGroundBuiltin(f"head {clause.head} left unbound")
            rows.add(row)
    return SolutionSet(index, frozenset(rows))


def eval_rule(fb: FactBase, rp: RuleProgram, i: int, prior: Mapping[int, SolutionSet]) -> SolutionSet:
    """Solutions of rule ``i`` given the solutions of every earlier rule."""
    clauses = rp.clauses(i)
    if not clauses:
        raise EvaluationError(f"no rule r{i}")
    return _eval_clauses(fb, clauses, prior, i)


def evaluate(fb: FactBase, rp: RuleProgram, trace: list | None = None) -> tuple[dict[int, SolutionSet], SolutionSet]:
    """Solution sets of every rule, then of the target."""
    prior: dict[int, SolutionSet] = {}
    for i in range(rp.rule_count):
        prior[i] = eval_rule(fb, rp, i, prior)
        if trace is not None:
            trace.append(TraceEntry(rp.clauses(i), prior[i]))
    target = _eval_clauses(fb, (rp.target,), prior, None)
    if trace is not None:
        trace.append(TraceEntry((rp.target,), target))
    return prior, target


def answer(fb: FactBase, rp: RuleProgram, trace: list | None = None) -> Answer:
    """Answer encoded by the target rule; evaluation failures give NULL."""
    try:
        _, target = evaluate(fb, rp, trace)
    except (EvaluationError, UnknownPredicate) as exc:
        logger.warning("evaluation failed, answering NULL: %s", exc)
        return NULL
    if rp.answer_kind is AnswerKind.BOOLEAN:
        return Answer.boolean(bool(target.rows))
    values = target.values
    if len(values) != 1:
        logger.info("target has %d groundings, answering NULL", len(values))
        return NULL
    (v,) = values
    if rp.answer_kind is AnswerKind.NUMERIC:
        return Answer.num(v) if isinstance(v, int) else NULL
    return Answer.attr(v) if isinstance(v, str) else NULL
