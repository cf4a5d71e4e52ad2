import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import CONSTS, atom_pairs, atoms, substitutions
from vqa_logic.logic import (
    AnswerKind,
    Atom,
    Constant,
    CountAtom,
    InvalidProgram,
    LogicError,
    Rule,
    RuleProgram,
    Substitution,
    SubstitutionConflict,
    Variable,
    apply,
    compose,
    term,
    unify,
)

W, X, Y, B, C = (Variable(n) for n in "WXYBC")


def A(pred, *args):
    return Atom(pred, tuple(term(a) for a in args))


def test_unify_binds_variable_to_constant():
    assert unify(A("attribute", "W", "size", "large"), A("attribute", 1, "size", "large")) == {W: Constant(1)}


def test_unify_constant_clash_fails():
    assert unify(A("attribute", "W", "color", "blue"), A("attribute", 1, "color", "green")) is None


def test_unify_relation_binds_both():
    s = unify(A("relation", "X", "Y", "left"), A("relation", 2, 3, "left"))
    assert s == {X: Constant(2), Y: Constant(3)}


@pytest.mark.parametrize(
    "a, b",
    [
        (A("same", "X", "Y"), A("greater_than", "X", "Y")),
        (A("r0", "X"), A("r1", "X")),
        (A("same", "X", 1), A("same", 2, 1)),
    ],
)
def test_unify_predicate_or_constant_mismatch(a, b):
    if a.predicate == b.predicate:
        assert unify(a, b) == {X: Constant(2)}
    else:
        assert unify(a, b) is None


def test_unify_repeated_variable_chains_resolve():
    s = unify(A("same", "X", "X"), A("same", "Y", 3))
    assert apply(s, A("same", "X", "X")) == apply(s, A("same", "Y", 3)) == A("same", 3, 3)
    assert unify(A("same", "X", "X"), A("same", 1, 2)) is None


def test_unify_count_atoms():
    a = CountAtom(A("r0", "W"), C)
    b = CountAtom(A("r0", "X"), Constant(2))
    s = unify(a, b)
    assert apply(s, a) == apply(s, b)
    assert unify(a, A("same", "W", "C")) is None


def test_apply_examples():
    assert apply({W: Constant(1)}, A("attribute", "W", "color", "B")) == A("attribute", 1, "color", "B")
    assert apply({}, A("relation", 1, 2, "left")) == A("relation", 1, 2, "left")
    s = Substitution({X: Constant(2), Y: Constant(3)})
    assert apply(s, A("same_color", "X", "Y")) == A("same_color", 2, 3)


def test_compose_examples():
    assert compose({W: X}, {X: Constant(1)}) == {W: Constant(1), X: Constant(1)}
    assert compose({}, {X: Constant(1)}) == {X: Constant(1)}
    with pytest.raises(SubstitutionConflict):
        compose({X: Constant(1)}, {X: Constant(2)})


def test_compose_rejects_non_idempotent_result():
    # Y -> X with X -> 1 cannot be represented without a binding chain.
    with pytest.raises(SubstitutionConflict):
        compose({X: Constant(1)}, {Y: X})


def test_substitution_invariants():
    with pytest.raises(LogicError):
        Substitution({X: X})
    with pytest.raises(LogicError):
        Substitution({X: Y, Y: Constant(1)})
    s = Substitution({X: Constant(1)})
    assert hash(s) == hash(Substitution({X: Constant(1)}))


@pytest.mark.parametrize("bad", ["x", "1X", "", "X-1"])
def test_variable_names(bad):
    with pytest.raises(LogicError):
        Variable(bad)


@pytest.mark.parametrize("bad", ["Red", "light blue", -1, True, "1a"])
def test_constant_syntax(bad):
    with pytest.raises(LogicError):
        Constant(bad)


def test_term_builder():
    assert term("W") == W
    assert term("7") == Constant(7)
    assert term("cube") == Constant("cube")


@pytest.mark.parametrize(
    "pred, n",
    [("attribute", 2), ("relation", 4), ("same_size", 1), ("object", 2), ("r3", 2), ("greater_than", 3)],
)
def test_arity_is_fixed(pred, n):
    with pytest.raises(LogicError):
        Atom(pred, tuple(Variable("X") for _ in range(n)))


def test_count_must_be_count_atom():
    with pytest.raises(LogicError):
        Atom("count", (X, C))
    with pytest.raises(LogicError):
        CountAtom(A("attribute", "X", "size", "large"), C)


def test_rule_rendering():
    r0 = Rule(A("r0", "W"), (A("attribute", "W", "size", "large"), A("attribute", "W", "color", "green")))
    assert str(r0) == "r0(W) :- attribute(W, size, large), attribute(W, color, green)."
    r1 = Rule(A("r1", "C"), (CountAtom(A("r0", "W"), C),))
    assert str(r1) == "r1(C) :- count(r0(W), C)."
    t = Rule(Atom("target", ()), (A("r1", "C1"), A("r1", "C2"), A("greater_than", "C1", "C2")))
    assert str(t) == "target :- r1(C1), r1(C2), greater_than(C1, C2)."


def test_rule_head_variable_must_occur_in_body():
    with pytest.raises(LogicError):
        Rule(A("r0", "X"), (A("object", "W"),))
    with pytest.raises(LogicError):
        Rule(A("r1", "W"), (CountAtom(A("r0", "W"), C),))
    with pytest.raises(LogicError):
        Rule(A("r0", "X"), ())


def _program(*rules, kind=AnswerKind.BOOLEAN):
    return RuleProgram(tuple(rules), kind)


def test_program_stratification():
    r0 = Rule(A("r0", "W"), (A("object", "W"),))
    target = Rule(Atom("target", ()), (A("r0", "W"),))
    assert _program(r0, target).rule_count == 1
    with pytest.raises(InvalidProgram):
        _program(Rule(A("r0", "W"), (A("r0", "W"),)), target)
    with pytest.raises(InvalidProgram):
        _program(r0, Rule(A("r1", "W"), (A("r2", "W"),)), target)
    with pytest.raises(InvalidProgram):
        _program(r0, Rule(A("r1", "C"), (CountAtom(A("r1", "W"), C),)), target)
    with pytest.raises(InvalidProgram):
        _program(Rule(A("r1", "W"), (A("object", "W"),)), target)
    with pytest.raises(InvalidProgram):
        _program(r0, Rule(Atom("target", ()), (A("r4", "W"),)))


def test_program_answer_kind_matches_target_arity():
    r0 = Rule(A("r0", "W"), (A("object", "W"),))
    with pytest.raises(InvalidProgram):
        _program(r0, Rule(Atom("target", ()), (A("r0", "W"),)), kind=AnswerKind.NUMERIC)
    with pytest.raises(InvalidProgram):
        _program(r0, Rule(A("target", "W"), (A("r0", "W"),)))


def test_program_disjunctive_clauses_share_index():
    r0a = Rule(A("r0", "W"), (A("attribute", "W", "color", "red"),))
    r0b = Rule(A("r0", "W"), (A("attribute", "W", "shape", "cube"),))
    p = _program(r0a, r0b, Rule(Atom("target", ()), (A("r0", "W"),)))
    assert p.clauses(0) == (r0a, r0b)
    with pytest.raises(InvalidProgram):
        _program(r0a, Rule(A("r1", "W"), (A("r0", "W"),)), r0b, Rule(Atom("target", ()), (A("r1", "W"),)))


# --- properties -------------------------------------------------------------


def check_unifier_sound(a, b):
    s = unify(a, b)
    if s is not None:
        assert apply(s, a) == apply(s, b)
        assert apply(s, apply(s, a)) == apply(s, a)


def check_unifier_most_general(a, b):
    """Brute force over a finite constant domain: unify succeeds iff some
    grounding equates the atoms, and every such grounding factors through it."""
    s = unify(a, b)
    variables = sorted({*a.variables(), *b.variables()}, key=str)
    domain = CONSTS + [Constant("fresh")]
    found = False
    for values in itertools.product(domain, repeat=len(variables)):
        theta = dict(zip(variables, values))
        if apply(theta, a) == apply(theta, b):
            found = True
            assert s is not None
            assert apply(theta, apply(s, a)) == apply(theta, a)
    assert found == (s is not None)


def check_ground_instance(a, choices):
    variables = sorted(set(a.variables()), key=str)
    theta = {v: CONSTS[c % len(CONSTS)] for v, c in zip(variables, choices)}
    g = apply(theta, a)
    s = unify(a, g)
    assert s is not None
    assert set(s) == set(variables)
    assert apply(s, a) == g


def check_compose(s1, s2, probe):
    try:
        r = compose(s1, s2)
    except SubstitutionConflict:
        return
    for atom in probe:
        assert apply(r, atom) == apply(s2, apply(s1, atom))
        assert apply(r, apply(r, atom)) == apply(r, atom)
    assert compose(r, r) == r


@settings(max_examples=300)
@given(atom_pairs())
def test_unifier_soundness(pair):
    check_unifier_sound(*pair)


@settings(max_examples=300)
@given(atom_pairs())
def test_unifier_most_general(pair):
    check_unifier_most_general(*pair)


@settings(max_examples=300)
@given(atoms(), st.lists(st.integers(0, 10), min_size=3, max_size=3))
def test_unify_with_ground_instance(a, choices):
    check_ground_instance(a, choices)


PROBE = [
    Atom("relation", (Variable("W"), Variable("X"), Variable("Y"))),
    Atom("same", (Variable("Z"), Variable("W"))),
]


@settings(max_examples=300)
@given(substitutions(), substitutions())
def test_compose_matches_sequential_application(s1, s2):
    check_compose(s1, s2, PROBE)
