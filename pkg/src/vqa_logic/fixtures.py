"""Random CLEVR-style scenes and questions, plus the bundled fixture set.

Questions are generated as expression trees, flattened into CLEVR program
node lists, and kept only when the oracle can answer them (every ``unique``
really picks one object), the same acceptance rule CLEVR's own generator uses.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .oracle import OracleError, execute, oracle_execute
from .program import FunctionalProgram, ProgramNode, QuestionFamily
from .scene import SceneGraph

VOCABULARY = {
    "size": ("large", "small"),
    "color": ("gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow"),
    "material": ("rubber", "metal"),
    "shape": ("cube", "sphere", "cylinder"),
}
RELATIONS = ("left", "right", "behind", "front")
FIXTURES_ENV = "VQA_LOGIC_FIXTURES"
MAX_PROGRAM_DEPTH = 12


def fixture_root() -> Path:
    """Directory holding ``scenes.json`` and ``questions.json``."""
    override = os.environ.get(FIXTURES_ENV)
    if override:
        return Path(override)
    return Path(str(resources.files("vqa_logic") / "data"))


def random_scene_doc(rng: random.Random, n_objects: int, image_index: int = 0) -> dict:
    """A scene in CLEVR JSON form with positions and derived relationships."""
    objects = []
    for _ in range(n_objects):
        obj = {t: rng.choice(values) for t, values in VOCABULARY.items()}
        obj["3d_coords"] = [round(rng.uniform(-3, 3), 2), round(rng.uniform(-3, 3), 2), 0.35]
        objects.append(obj)
    eps = 0.2
    rels = {r: [[] for _ in objects] for r in RELATIONS}
    for i, anchor in enumerate(objects):
        ax, ay, _ = anchor["3d_coords"]
        for j, other in enumerate(objects):
            if i == j:
                continue
            x, y, _ = other["3d_coords"]
            if x < ax - eps:
                rels["left"][i].append(j)
            if x > ax + eps:
                rels["right"][i].append(j)
            if y < ay - eps:
                rels["behind"][i].append(j)
            if y > ay + eps:
                rels["front"][i].append(j)
    return {"image_index": image_index, "objects": objects, "relationships": rels}


@dataclass(frozen=True)
class Expr:
    op: str
    values: tuple[str, ...] = ()
    children: tuple[Expr, ...] = ()


def flatten(expr: Expr) -> FunctionalProgram:
    nodes: list[ProgramNode] = []

    def visit(e: Expr) -> int:
        inputs = tuple(visit(c) for c in e.children)
        nodes.append(ProgramNode(e.op, inputs, e.values))
        return len(nodes) - 1

    visit(expr)
    return FunctionalProgram(tuple(nodes))


class _Retry(Exception):
    pass


def _scene_expr() -> Expr:
    return Expr("scene")


@dataclass
class QuestionGenerator:
    """Builds random programs over one scene.

    With ``well_posed`` set, programs whose ``unique`` steps do not isolate a
    single object are rejected, so the oracle can always answer them.
    """

    rng: random.Random
    scene: SceneGraph
    well_posed: bool = True
    max_depth: int = 2
    _attrs: dict = field(init=False, repr=False)

    def __post_init__(self):
        self._attrs = {o.id: o.attributes for o in self.scene.objects}

    def _objects(self, e: Expr) -> frozenset:
        try:
            return execute(self.scene, flatten(e))[-1]
        except OracleError:
            if self.well_posed:
                raise _Retry from None
            return frozenset()

    def _filter(self, e: Expr, t: str) -> Expr:
        current = self._objects(e)
        if current and self.rng.random() < 0.8:
            value = self._attrs[self.rng.choice(sorted(current))][t]
        else:
            value = self.rng.choice(VOCABULARY[t])
        return Expr(f"filter_{t}", (value,), (e,))

    def _filters(self, e: Expr, k: int) -> Expr:
        for t in self.rng.sample(list(VOCABULARY), k):
            e = self._filter(e, t)
        return e

    def objects(self, depth: int) -> Expr:
        kinds = ["base"]
        if depth > 0:
            kinds += ["relate", "relate", "same", "intersect", "union"]
        kind = self.rng.choice(kinds)
        if kind == "base":
            return self._filters(_scene_expr(), self.rng.choice((0, 1, 1, 2, 2, 3)))
        if kind == "relate":
            e = Expr("relate", (self.rng.choice(RELATIONS),), (self.unique(depth - 1),))
            return self._filters(e, self.rng.choice((0, 1, 1, 2)))
        if kind == "same":
            t = self.rng.choice(list(VOCABULARY))
            e = Expr(f"same_{t}", (), (self.unique(depth - 1),))
            return self._filters(e, self.rng.choice((0, 1, 1)))
        a, b = self.objects(depth - 1), self.objects(depth - 1)
        return Expr(kind, (), (a, b))

    def unique(self, depth: int) -> Expr:
        e = self.objects(self.rng.randint(0, depth)) if depth > 0 else _scene_expr()
        current = self._objects(e)
        if not current:
            e, current = _scene_expr(), frozenset(self._attrs)
        if not current:
            if self.well_posed:
                raise _Retry
            return Expr("unique", (), (e,))
        target = self.rng.choice(sorted(current))
        for t in self.rng.sample(list(VOCABULARY), len(VOCABULARY)):
            if len(current) == 1:
                break
            e = Expr(f"filter_{t}", (self._attrs[target][t],), (e,))
            current = self._objects(e)
        if len(current) != 1 and self.well_posed:
            raise _Retry
        return Expr("unique", (), (e,))

    def question(self, family: QuestionFamily) -> Expr:
        d = self.rng.randint(0, self.max_depth)
        if family is QuestionFamily.COUNT:
            return Expr("count", (), (self.objects(d),))
        if family is QuestionFamily.EXIST:
            return Expr("exist", (), (self.objects(d),))
        if family is QuestionFamily.COMPARE_NUMBER:
            op = self.rng.choice(("equal_integer", "greater_than", "less_than"))
            a = Expr("count", (), (self.objects(d),))
            b = Expr("count", (), (self.objects(self.rng.randint(0, self.max_depth)),))
            return Expr(op, (), (a, b))
        t = self.rng.choice(list(VOCABULARY))
        if family is QuestionFamily.COMPARE_ATTRIBUTE:
            return Expr(f"equal_{t}", (), (self.unique(d), self.unique(self.rng.randint(0, self.max_depth))))
        return Expr(f"query_{t}", (), (self.unique(d),))

    def program(self, family: QuestionFamily, attempts: int = 200) -> tuple[Expr, FunctionalProgram]:
        for _ in range(attempts):
            try:
                expr = self.question(family)
            except _Retry:
                continue
            fp = flatten(expr)
            if fp.depth() > MAX_PROGRAM_DEPTH:
                continue
            if self.well_posed:
                try:
                    oracle_execute(self.scene, fp)
                except OracleError:
                    continue
            return expr, fp
        raise RuntimeError(f"could not generate a {family.value} question for this scene")


# --- question text ----------------------------------------------------------

_PLURAL = {"cube": "cubes", "sphere": "spheres", "cylinder": "cylinders"}
_RELATION_TEXT = {"left": "left of", "right": "right of", "behind": "behind", "front": "in front of"}


def noun_phrase(e: Expr, plural: bool = True) -> str:
    filters = {}
    while e.op.startswith("filter_") or e.op == "unique":
        if e.op != "unique":
            filters.setdefault(e.op[len("filter_"):], e.values[0])
        e = e.children[0]
    words = [filters[t] for t in ("size", "color", "material") if t in filters]
    shape = filters.get("shape")
    noun = (_PLURAL[shape] if plural else shape) if shape else ("things" if plural else "thing")
    head = " ".join(words + [noun])
    if e.op == "scene":
        return head
    if e.op == "relate":
        return f"{head} {_RELATION_TEXT.get(e.values[0], e.values[0])} the {noun_phrase(e.children[0], False)}"
    if e.op.startswith("same_"):
        t = e.op[len("same_"):]
        return f"other {head} with the same {t} as the {noun_phrase(e.children[0], False)}"
    a, b = (noun_phrase(c, plural) for c in e.children)
    if e.op == "union":
        return f"{head} that are {a} or {b}" if words or shape else f"{a} or {b}"
    return f"{head} that are both {a} and {b}" if words or shape else f"{a} that are also {b}"


def question_text(e: Expr) -> str:
    op = e.op
    if op == "count":
        return f"How many {noun_phrase(e.children[0])} are there?"
    if op == "exist":
        return f"Are there any {noun_phrase(e.children[0])}?"
    if op in ("greater_than", "less_than", "equal_integer"):
        a, b = (noun_phrase(c.children[0]) for c in e.children)
        if op == "greater_than":
            return f"Are there more {a} than {b}?"
        if op == "less_than":
            return f"Are there fewer {a} than {b}?"
        return f"Are there the same number of {a} and {b}?"
    t = op.split("_", 1)[1]
    if op.startswith("equal_"):
        a, b = (noun_phrase(c, False) for c in e.children)
        return f"Does the {a} have the same {t} as the {b}?"
    return f"What {t} is the {noun_phrase(e.children[0], False)}?"


def make_dataset(
    seed: int,
    n_scenes: int,
    questions_per_scene: int,
    min_objects: int = 2,
    max_objects: int = 8,
    families: tuple[QuestionFamily, ...] = tuple(QuestionFamily),
) -> tuple[dict, dict]:
    """Random scenes and oracle-answered questions in CLEVR JSON layout.

    Families are cycled so every family gets (almost) the same share.
    """
    rng = random.Random(seed)
    scenes, questions = [], []
    k = 0
    for image_index in range(n_scenes):
        while True:
            doc = random_scene_doc(rng, rng.randint(min_objects, max_objects), image_index)
            scene = SceneGraph.from_clevr(doc)
            gen = QuestionGenerator(rng, scene)
            try:
                batch = [
                    gen.program(families[(k + n) % len(families)])
                    for n in range(questions_per_scene)
                ]
                break
            except RuntimeError:
                # e.g. indistinguishable objects leave nothing to single out
                continue
        for expr, fp in batch:
            family = families[k % len(families)]
            questions.append(
                {
                    "question_index": k,
                    "image_index": image_index,
                    "question": question_text(expr),
                    "program": fp.to_clevr(),
                    "answer": oracle_execute(scene, fp).text,
                    "question_family": family.value,
                }
            )
            k += 1
        scenes.append(doc)
    return {"scenes": scenes}, {"questions": questions}
