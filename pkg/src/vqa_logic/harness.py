"""Dataset runner and per-family accuracy reports (CLEVR evaluation table)."""

from __future__ import annotations

import json
import logging
import time
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

from .compiler import compile_program
from .inference import NULL, Answer, answer
from .program import FunctionalProgram, ProgramError, QuestionFamily, classify
from .scene import FactBase, MalformedScene, SceneGraph
from .sentence import ParseError, parse, serialize

logger = logging.getLogger(__name__)

TABLE_COLUMNS = [f.value for f in QuestionFamily] + ["Overall"]


class FormatError(ValueError):
    """A dataset file is not valid JSON or lacks the expected layout."""


@dataclass(frozen=True)
class Question:
    index: int
    text: str
    program: object  # raw CLEVR program list, parsed lazily
    answer: str | None
    image_index: int

    def functional_program(self) -> FunctionalProgram:
        return FunctionalProgram.from_clevr(self.program)


def _read_json(path) -> object:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_scenes(path) -> dict[int, SceneGraph | MalformedScene]:
    """Scenes keyed by ``image_index`` (or position).

    A malformed scene is kept as its exception so that only the questions
    about it fail.
    """
    doc = _read_json(path)
    if isinstance(doc, Mapping) and "scenes" in doc:
        records = doc["scenes"]
        if not isinstance(records, list):
            raise FormatError(f"{path}: 'scenes' must be a list")
    elif isinstance(doc, Mapping) and "objects" in doc:
        records = [doc]
    else:
        raise FormatError(f"{path}: expected a 'scenes' list or a single scene with 'objects'")
    scenes: dict[int, SceneGraph | MalformedScene] = {}
    for pos, record in enumerate(records):
        key = record.get("image_index", pos) if isinstance(record, Mapping) else pos
        try:
            scenes[key] = SceneGraph.from_clevr(record)
        except MalformedScene as exc:
            logger.warning("%s: scene[%d]: %s", path, pos, exc)
            scenes[key] = exc
    return scenes


def load_questions(path) -> list[Question]:
    doc = _read_json(path)
    records = doc.get("questions") if isinstance(doc, Mapping) else doc
    if not isinstance(records, list):
        raise FormatError(f"{path}: expected a 'questions' list")
    out = []
    for pos, q in enumerate(records):
        if not isinstance(q, Mapping):
            raise FormatError(f"{path}: questions[{pos}] is not an object")
        ans = q.get("answer")
        out.append(
            Question(
                index=q.get("question_index", pos),
                text=q.get("question", ""),
                program=q.get("program", []),
                answer=None if ans is None else str(ans),
                image_index=q.get("image_index", 0),
            )
        )
    return out


@dataclass
class Tally:
    total: int = 0
    correct: int = 0
    null_count: int = 0

    @property
    def accuracy(self) -> float | None:
        return self.correct / self.total if self.total else None

    def add(self, other: Tally) -> None:
        self.total += other.total
        self.correct += other.correct
        self.null_count += other.null_count

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "correct": self.correct,
            "null_count": self.null_count,
            "accuracy": self.accuracy,
        }


@dataclass
class EvalReport:
    families: dict[QuestionFamily, Tally] = field(
        default_factory=lambda: {f: Tally() for f in QuestionFamily}
    )
    unclassified: Tally = field(default_factory=Tally)
    duration: float = 0.0

    def record(self, family: QuestionFamily | None, correct: bool, null: bool) -> None:
        t = self.families[family] if family is not None else self.unclassified
        t.total += 1
        t.correct += int(correct)
        t.null_count += int(null)

    @property
    def overall(self) -> Tally:
        out = Tally()
        for t in self.families.values():
            out.add(t)
        out.add(self.unclassified)
        return out

    @property
    def accuracy(self) -> float | None:
        return self.overall.accuracy

    def to_dict(self) -> dict:
        return {
            "families": {f.value: t.to_dict() for f, t in self.families.items()},
            "unclassified": self.unclassified.to_dict(),
            "overall": self.overall.to_dict(),
            "duration_seconds": round(self.duration, 3),
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> EvalReport:
        def tally(d):
            return Tally(d["total"], d["correct"], d["null_count"])

        report = cls(
            families={QuestionFamily(k): tally(v) for k, v in doc["families"].items()},
            unclassified=tally(doc["unclassified"]),
            duration=doc.get("duration_seconds", 0.0),
        )
        for f in QuestionFamily:
            report.families.setdefault(f, Tally())
        return report

    def same_tallies(self, other: EvalReport) -> bool:
        return self.families == other.families and self.unclassified == other.unclassified


Translator = Callable[[Question, str], str]


@dataclass
class RunOptions:
    """``translator`` stands in for a learned question-to-sentence model: it
    receives the question and the compiled sentence and returns the sentence
    to parse.  Setting it implies ``via_sentence``."""

    limit: int | None = None
    families: Iterable[QuestionFamily] | None = None
    via_sentence: bool = False
    translator: Translator | None = None
    trace: TextIO | None = None


@dataclass(frozen=True)
class Outcome:
    question: Question
    family: QuestionFamily | None
    answer: Answer
    correct: bool
    error: str | None = None


def answer_sentence(fb: FactBase, sentence: str, trace: list | None = None) -> Answer:
    """Answer a target sentence; malformed sentences give NULL."""
    try:
        rp = parse(sentence)
    except ParseError as exc:
        logger.info("unparseable sentence, answering NULL: %s", exc)
        return NULL
    return answer(fb, rp, trace)


def _family(q: Question) -> QuestionFamily | None:
    try:
        return classify(q.functional_program())
    except ProgramError:
        return None


def evaluate_question(
    q: Question,
    scenes: Mapping[int, SceneGraph | Exception],
    cache: dict[int, FactBase],
    opts: RunOptions,
    family: QuestionFamily | None = None,
) -> Outcome:
    trace: list | None = [] if opts.trace is not None else None
    try:
        fp = q.functional_program()
        family = family or classify(fp)
        scene = scenes[q.image_index]
        if isinstance(scene, Exception):
            raise scene
        fb = cache.get(q.image_index)
        if fb is None:
            fb = cache[q.image_index] = FactBase.from_scene(scene)
        rp = compile_program(fp)
        if opts.via_sentence or opts.translator is not None:
            sentence = serialize(rp)
            if opts.translator is not None:
                sentence = opts.translator(q, sentence)
            result = answer_sentence(fb, sentence, trace)
        else:
            result = answer(fb, rp, trace)
        error = None
    except Exception as exc:  # one bad question must not abort the run
        if not isinstance(exc, (ProgramError, MalformedScene, KeyError, ValueError)):
            logger.exception("question %s failed", q.index)
        result, error = NULL, f"{type(exc).__name__}: {exc}"
    correct = q.answer is not None and result.matches(q.answer)
    if opts.trace is not None:
        print(f"# question {q.index}: {q.text}", file=opts.trace)
        for entry in trace or ():
            print(entry, file=opts.trace)
        print(f"answer: {result}  expected: {q.answer}" + (f"  ({error})" if error else ""), file=opts.trace)
    return Outcome(q, family, result, correct, error)


def run_questions(
    scenes: Mapping[int, SceneGraph | Exception],
    questions: list[Question],
    opts: RunOptions | None = None,
) -> EvalReport:
    opts = opts or RunOptions()
    start = time.perf_counter()
    if opts.limit is not None:
        questions = questions[: opts.limit]
    wanted = set(opts.families) if opts.families is not None else None
    report = EvalReport()
    cache: dict[int, FactBase] = {}
    for q in questions:
        family = _family(q)
        if wanted is not None and family not in wanted:
            continue
        out = evaluate_question(q, scenes, cache, opts, family)
        report.record(out.family, out.correct, out.answer.is_null)
    report.duration = time.perf_counter() - start
    return report


def run_dataset(scenes_path, questions_path, opts: RunOptions | None = None) -> EvalReport:
    """Run the whole pipeline over a CLEVR-format scenes/questions pair."""
    return run_questions(load_scenes(scenes_path), load_questions(questions_path), opts)


def _pct(t: Tally) -> str:
    return "n/a" if t.accuracy is None else f"{100 * t.accuracy:.1f}"


def emit_report(r: EvalReport, format: str = "text") -> str:
    if format == "json":
        return json.dumps(r.to_dict(), indent=2, sort_keys=True)
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")
    cols = [r.families[f] for f in QuestionFamily] + [r.overall]
    widths = [max(len(name), 9) for name in TABLE_COLUMNS]
    label = 14

    def row(name, cells):
        return name.ljust(label) + " | " + " | ".join(c.rjust(w) for c, w in zip(cells, widths))

    lines = [
        row("", TABLE_COLUMNS),
        "-" * label + "-+-" + "-+-".join("-" * w for w in widths),
        row("accuracy (%)", [_pct(t) for t in cols]),
        row("correct/total", [f"{t.correct}/{t.total}" for t in cols]),
        row("null", [str(t.null_count) for t in cols]),
    ]
    if r.unclassified.total:
        lines.append(f"unclassified questions: {r.unclassified.total}")
    lines.append(f"duration: {r.duration:.2f} s")
    return "\n".join(lines)
