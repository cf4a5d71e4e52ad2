"""Scene graphs and the background knowledge (fact base) built from them."""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from .logic import (
    BASE_PREDICATES,
    CONSTANT_RE,
    Atom,
    Constant,
    UnknownPredicate,
    unify,
)

CLEVR_ATTRIBUTES = ("size", "color", "material", "shape")
CLEVR_RELATIONS = ("left", "right", "behind", "front")


class MalformedScene(ValueError):
    pass


@dataclass(frozen=True)
class ObjectRecord:
    id: int
    attributes: Mapping[str, str]


@dataclass(frozen=True)
class SceneGraph:
    objects: tuple[ObjectRecord, ...]
    relations: tuple[tuple[int, int, str], ...]
    image_index: int | None = None

    @classmethod
    def from_clevr(cls, doc: Mapping, attribute_types: Iterable[str] = CLEVR_ATTRIBUTES):
        """Build a scene from a CLEVR scene record.

        ``relationships[r][i]`` lists the objects that stand in relation r to
        object i, so each entry j yields the triple (j, i, r).
        """
        if not isinstance(doc, Mapping):
            raise MalformedScene("scene must be a JSON object")
        raw_objects = doc.get("objects")
        if not isinstance(raw_objects, list):
            raise MalformedScene("scene has no 'objects' list")
        attribute_types = tuple(attribute_types)
        objects = []
        for i, raw in enumerate(raw_objects):
            if not isinstance(raw, Mapping):
                raise MalformedScene(f"object {i} is not a JSON object")
            if "id" in raw and raw["id"] != i:
                raise MalformedScene(f"object at position {i} has id {raw['id']!r}")
            attrs = {}
            for t in attribute_types:
                if t not in raw:
                    raise MalformedScene(f"object {i} is missing attribute {t!r}")
                value = raw[t]
                if not isinstance(value, str) or not CONSTANT_RE.match(value):
                    raise MalformedScene(f"object {i} has invalid {t} value {value!r}")
                attrs[t] = value
            objects.append(ObjectRecord(i, attrs))

        n = len(objects)
        relations = set()
        rels = doc.get("relationships", {})
        if not isinstance(rels, Mapping):
            raise MalformedScene("'relationships' must map relation names to lists")
        for name, per_object in rels.items():
            if not isinstance(name, str) or not CONSTANT_RE.match(name):
                raise MalformedScene(f"invalid relation name {name!r}")
            if not isinstance(per_object, list) or len(per_object) != n:
                raise MalformedScene(f"relationships[{name!r}] must have one list per object")
            for i, others in enumerate(per_object):
                if not isinstance(others, list):
                    raise MalformedScene(f"relationships[{name!r}][{i}] is not a list")
                for j in others:
                    if isinstance(j, bool) or not isinstance(j, int) or not 0 <= j < n:
                        raise MalformedScene(
                            f"relationships[{name!r}][{i}] has out-of-range index {j!r}"
                        )
                    relations.add((j, i, name))
        return cls(tuple(objects), tuple(sorted(relations)), doc.get("image_index"))

    def to_clevr(self) -> dict:
        names = sorted({r for _, _, r in self.relations})
        rels = {name: [[] for _ in self.objects] for name in names}
        for a, b, r in self.relations:
            rels[r][b].append(a)
        for lists in rels.values():
            for lst in lists:
                lst.sort()
        doc = {"objects": [dict(o.attributes) for o in self.objects], "relationships": rels}
        if self.image_index is not None:
            doc["image_index"] = self.image_index
        return doc

    def relabel(self, order: list[int]) -> SceneGraph:
        """Reorder objects so the new object k is the old object ``order[k]``."""
        if sorted(order) != list(range(len(self.objects))):
            raise ValueError("order must be a permutation of the object ids")
        new_id = {old: new for new, old in enumerate(order)}
        objects = tuple(
            ObjectRecord(k, dict(self.objects[old].attributes)) for k, old in enumerate(order)
        )
        relations = tuple(sorted((new_id[a], new_id[b], r) for a, b, r in self.relations))
        return SceneGraph(objects, relations, self.image_index)


class FactBase:
    """Indexed, immutable store of ``object/1``, ``attribute/3`` and
    ``relation/3`` groundings for one scene."""

    def __init__(
        self,
        universe: Iterable[int],
        attributes: Mapping[tuple[int, str], str],
        relations: Iterable[tuple[int, int, str]] = (),
    ):
        self.universe = frozenset(universe)
        self._attributes = dict(attributes)
        relations = sorted(set(relations))
        for (i, _t) in self._attributes:
            if i not in self.universe:
                raise MalformedScene(f"attribute fact for unknown object {i}")
        for a, b, _r in relations:
            if a not in self.universe or b not in self.universe:
                raise MalformedScene(f"relation fact ({a}, {b}) mentions an unknown object")

        facts = [Atom("object", (Constant(i),)) for i in sorted(self.universe)]
        for (i, t), v in sorted(self._attributes.items()):
            facts.append(Atom("attribute", (Constant(i), Constant(t), Constant(v))))
        for a, b, r in relations:
            facts.append(Atom("relation", (Constant(a), Constant(b), Constant(r))))
        self.facts: tuple[Atom, ...] = tuple(facts)

        self._index: dict[tuple, list[int]] = defaultdict(list)
        for pos, fact in enumerate(self.facts):
            p = fact.predicate
            vals = [a.value for a in fact.args]
            self._index[(p,)].append(pos)
            if p == "object":
                self._index[(p, 0, vals[0])].append(pos)
            elif p == "attribute":
                i, t, v = vals
                self._index[(p, 0, i)].append(pos)
                self._index[(p, 1, t)].append(pos)
                self._index[(p, 12, t, v)].append(pos)
            else:
                a, b, r = vals
                self._index[(p, 0, a)].append(pos)
                self._index[(p, 1, b)].append(pos)
                self._index[(p, 2, r)].append(pos)

    @classmethod
    def from_scene(cls, scene: SceneGraph) -> FactBase:
        attrs = {}
        for obj in scene.objects:
            for t, v in obj.attributes.items():
                attrs[(obj.id, t)] = v
        return cls((o.id for o in scene.objects), attrs, scene.relations)

    def __len__(self):
        return len(self.facts)

    def __iter__(self):
        return iter(self.facts)

    @property
    def numeric_pool(self) -> frozenset[int]:
        """Every integer a count over this scene can produce."""
        return frozenset(range(len(self.universe) + 1))

    def attribute_value(self, obj: int, attribute_type: str) -> str | None:
        return self._attributes.get((obj, attribute_type))

    def _candidates(self, pattern: Atom) -> list[int]:
        p = pattern.predicate
        bound = [a.value if isinstance(a, Constant) else None for a in pattern.args]
        keys = []
        if p == "attribute":
            i, t, v = bound
            if i is not None:
                keys.append((p, 0, i))
            if t is not None and v is not None:
                keys.append((p, 12, t, v))
            elif t is not None:
                keys.append((p, 1, t))
        else:
            for slot, value in enumerate(bound):
                if value is not None:
                    keys.append((p, slot, value))
        if not keys:
            return self._index.get((p,), [])
        lists = [self._index.get(k, []) for k in keys]
        return min(lists, key=len)

    def facts_of(self, pattern: Atom) -> list[Atom]:
        """Stored facts unifiable with ``pattern``, in canonical order."""
        if pattern.predicate not in BASE_PREDICATES:
            raise UnknownPredicate(f"{pattern.predicate} is not a fact-base predicate")
        if len(pattern.args) != BASE_PREDICATES[pattern.predicate]:
            return []
        out = []
        for pos in self._candidates(pattern):
            fact = self.facts[pos]
            if unify(pattern, fact) is not None:
                out.append(fact)
        return out

    def __repr__(self):
        return f"FactBase({len(self.universe)} objects, {len(self.facts)} facts)"


def ingest_scene(doc: Mapping | SceneGraph, attribute_types: Iterable[str] = CLEVR_ATTRIBUTES) -> FactBase:
    """Convert a scene-graph document into its background knowledge."""
    scene = doc if isinstance(doc, SceneGraph) else SceneGraph.from_clevr(doc, attribute_types)
    return FactBase.from_scene(scene)

