"""Command line entry point: ``vqa-logic run|compile|parse|generate``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .compiler import compile_program
from .fixtures import fixture_root, make_dataset
from .harness import (
    FormatError,
    RunOptions,
    answer_sentence,
    emit_report,
    load_questions,
    load_scenes,
    run_questions,
)
from .inference import TraceEntry
from .program import ProgramError, QuestionFamily, classify
from .scene import FactBase
from .sentence import ParseError, UnencodableProgram, parse, serialize


def _default(path: str | None, name: str) -> Path:
    return Path(path) if path else fixture_root() / name


def cmd_run(args) -> int:
    families = [QuestionFamily.parse(f) for f in args.family] if args.family else None
    opts = RunOptions(
        limit=args.limit,
        families=families,
        via_sentence=args.via_sentence,
        trace=sys.stderr if args.trace else None,
    )
    scenes = load_scenes(_default(args.scenes, "scenes.json"))
    questions = load_questions(_default(args.questions, "questions.json"))
    report = run_questions(scenes, questions, opts)
    print(emit_report(report, args.report))
    return 0


def cmd_compile(args) -> int:
    questions = load_questions(_default(args.questions, "questions.json"))
    matches = [q for q in questions if q.index == args.question_index]
    if not matches:
        print(f"no question with index {args.question_index}", file=sys.stderr)
        return 1
    q = matches[0]
    try:
        fp = q.functional_program()
        rp = compile_program(fp)
        sentence = serialize(rp)
    except (ProgramError, UnencodableProgram) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"question: {q.text}")
    print(f"family:   {classify(fp).value}")
    print(f"program:  {fp}")
    print("rules:")
    for rule in rp.rules:
        print(f"  {rule}")
    print(f"sentence: {sentence}")
    return 0


def cmd_parse(args) -> int:
    try:
        rp = parse(args.sentence)
    except ParseError as exc:
        print(f"ParseError: {exc}", file=sys.stderr)
        print("answer: NULL")
        return 1
    for rule in rp.rules:
        print(rule)
    if args.scenes:
        scenes = load_scenes(args.scenes)
        scene = scenes.get(args.image_index)
        if scene is None or isinstance(scene, Exception):
            print(f"no usable scene with image_index {args.image_index}", file=sys.stderr)
            return 1
        trace: list[TraceEntry] = []
        result = answer_sentence(FactBase.from_scene(scene), args.sentence, trace)
        if args.trace:
            for entry in trace:
                print(entry)
        print(f"answer: {result}")
    return 0


def cmd_generate(args) -> int:
    scenes, questions = make_dataset(
        args.seed, args.scenes, args.questions_per_scene, args.min_objects, args.max_objects
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scenes.json").write_text(json.dumps(scenes, indent=1) + "\n")
    (out / "questions.json").write_text(json.dumps(questions, indent=1) + "\n")
    print(f"wrote {len(questions['questions'])} questions over {args.scenes} scenes to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vqa-logic", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings from the engine")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="answer every question and print accuracy per family")
    run.add_argument("--scenes", help="CLEVR scenes JSON (default: bundled fixtures)")
    run.add_argument("--questions", help="CLEVR questions JSON (default: bundled fixtures)")
    run.add_argument("--limit", type=int, help="only the first N questions")
    run.add_argument("--family", action="append", help="restrict to a question family (repeatable)")
    run.add_argument("--via-sentence", action="store_true", help="round-trip rules through the target sentence")
    run.add_argument("--report", choices=("text", "json"), default="text")
    run.add_argument("--trace", action="store_true", help="print rules and solution sets to stderr")
    run.set_defaults(func=cmd_run)

    comp = sub.add_parser("compile", help="show the rules and target sentence of one question")
    comp.add_argument("--question-index", type=int, required=True)
    comp.add_argument("--questions", help="CLEVR questions JSON (default: bundled fixtures)")
    comp.set_defaults(func=cmd_compile)

    par = sub.add_parser("parse", help="rebuild rules from a target sentence")
    par.add_argument("sentence")
    par.add_argument("--scenes", help="also answer the sentence against this scenes file")
    par.add_argument("--image-index", type=int, default=0)
    par.add_argument("--trace", action="store_true")
    par.set_defaults(func=cmd_parse)

    gen = sub.add_parser("generate", help="write a random CLEVR-style fixture set")
    gen.add_argument("--out", required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--scenes", type=int, default=100)
    gen.add_argument("--questions-per-scene", type=int, default=5)
    gen.add_argument("--min-objects", type=int, default=2)
    gen.add_argument("--max-objects", type=int, default=8)
    gen.set_defaults(func=cmd_generate)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR)
    try:
        return args.func(args)
    except (OSError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
