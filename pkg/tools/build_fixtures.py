"""Regenerate the bundled fixture set in src/vqa_logic/data/.

Scene 0 is the two-object scene for the "more big green things than large
purple shiny cubes" question; scenes 1 and 2 are random. Answers come from
the oracle executor.
"""

import json
import random
from pathlib import Path

from vqa_logic.fixtures import QuestionGenerator, random_scene_doc, question_text
from vqa_logic.oracle import oracle_execute
from vqa_logic.program import FunctionalProgram, QuestionFamily as F, classify
from vqa_logic.scene import SceneGraph

OUT = Path(__file__).resolve().parents[1] / "src" / "vqa_logic" / "data"


def node(op, inputs=(), values=()):
    return {"function": op, "inputs": list(inputs), "value_inputs": list(values)}


WORKED_SCENE = {
    "image_index": 0,
    "objects": [
        {"size": "large", "color": "green", "material": "rubber", "shape": "sphere", "3d_coords": [-1.0, 0.0, 0.7]},
        {"size": "large", "color": "purple", "material": "metal", "shape": "cube", "3d_coords": [1.0, 0.0, 0.7]},
    ],
    # relationships[r][i] lists the objects standing in relation r to object i
    "relationships": {"left": [[], [0]], "right": [[1], []], "behind": [[], []], "front": [[], []]},
}

WORKED_QUESTIONS = [
    (
        "Are there more big green things than large purple shiny cubes?",
        [
            node("scene"), node("filter_size", [0], ["large"]), node("filter_color", [1], ["green"]),
            node("count", [2]), node("scene"), node("filter_size", [4], ["large"]),
            node("filter_color", [5], ["purple"]), node("filter_material", [6], ["metal"]),
            node("filter_shape", [7], ["cube"]), node("count", [8]), node("greater_than", [3, 9]),
        ],
    ),
    ("How many things are there?", [node("scene"), node("count", [0])]),
    (
        "What color is the thing left of the cube?",
        [
            node("scene"), node("filter_shape", [0], ["cube"]), node("unique", [1]),
            node("relate", [2], ["left"]), node("unique", [3]), node("query_color", [4]),
        ],
    ),
    ("Are there any red things?", [node("scene"), node("filter_color", [0], ["red"]), node("exist", [1])]),
]

RANDOM_FAMILIES = {
    1: [F.COMPARE_ATTRIBUTE, F.QUERY_ATTRIBUTE, F.COUNT, F.EXIST],
    2: [F.COMPARE_NUMBER, F.COMPARE_ATTRIBUTE, F.QUERY_ATTRIBUTE, F.EXIST],
}


def main():
    rng = random.Random(20240601)
    scenes = [WORKED_SCENE]
    questions = []
    scene0 = SceneGraph.from_clevr(WORKED_SCENE)
    for text, program in WORKED_QUESTIONS:
        questions.append((0, text, FunctionalProgram.from_clevr(program), scene0))
    for image_index, families in RANDOM_FAMILIES.items():
        doc = random_scene_doc(rng, rng.randint(4, 7), image_index)
        scene = SceneGraph.from_clevr(doc)
        scenes.append(doc)
        gen = QuestionGenerator(rng, scene)
        for fam in families:
            expr, fp = gen.program(fam)
            questions.append((image_index, question_text(expr), fp, scene))

    records = []
    for k, (image_index, text, fp, scene) in enumerate(questions):
        records.append({
            "question_index": k,
            "image_index": image_index,
            "question": text,
            "program": fp.to_clevr(),
            "answer": oracle_execute(scene, fp).text,
            "question_family": classify(fp).value,
        })
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "scenes.json").write_text(json.dumps({"scenes": scenes}, indent=1) + "\n")
    (OUT / "questions.json").write_text(json.dumps({"questions": records}, indent=1) + "\n")
    for r in records:
        print(r["image_index"], r["question_family"], "|", r["question"], "->", r["answer"])


if __name__ == "__main__":
    main()
