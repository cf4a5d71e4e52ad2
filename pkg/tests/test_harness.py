import json

import pytest

from vqa_logic import cli
from vqa_logic.fixtures import FIXTURES_ENV, fixture_root, make_dataset
from vqa_logic.harness import (
    EvalReport,
    FormatError,
    RunOptions,
    emit_report,
    evaluate_question,
    load_questions,
    load_scenes,
    run_dataset,
)
from vqa_logic.program import QuestionFamily
from vqa_logic.scene import MalformedScene


def bundled():
    root = fixture_root()
    return root / "scenes.json", root / "questions.json"


def test_bundled_fixtures_are_all_correct():
    report = run_dataset(*bundled())
    assert report.overall.total == 12
    assert report.accuracy == 1.0
    assert report.overall.null_count == 0
    assert all(t.total > 0 for t in report.families.values())


def test_codec_path_gives_identical_report():
    direct = run_dataset(*bundled())
    via = run_dataset(*bundled(), RunOptions(via_sentence=True))
    assert direct.same_tallies(via)


def test_corrupted_sentence_only_affects_its_question():
    scenes_path, questions_path = bundled()
    clean = run_dataset(scenes_path, questions_path, RunOptions(via_sentence=True))

    def translator(q, sentence):
        return sentence.replace("attribute", "atribute", 1) if q.index == 3 else sentence

    broken = run_dataset(scenes_path, questions_path, RunOptions(translator=translator))
    assert broken.overall.total == clean.overall.total
    assert broken.overall.correct == clean.overall.correct - 1
    assert broken.overall.null_count == 1
    assert broken.families[QuestionFamily.EXIST].null_count == 1
    others = [f for f in QuestionFamily if f is not QuestionFamily.EXIST]
    assert all(broken.families[f] == clean.families[f] for f in others)


def test_limit_zero_renders_na():
    report = run_dataset(*bundled(), RunOptions(limit=0))
    assert report.overall.total == 0
    assert report.accuracy is None
    text = emit_report(report)
    assert text.count("n/a") == 6


def test_family_filter_and_limit():
    report = run_dataset(*bundled(), RunOptions(limit=4, families=[QuestionFamily.COUNT]))
    assert report.overall.total == report.families[QuestionFamily.COUNT].total == 1


def test_text_report_lists_table_columns():
    text = emit_report(run_dataset(*bundled()))
    header = text.splitlines()[0]
    for name in ["Count", "Exist", "Compare Number", "Compare Attribute", "Query Attribute", "Overall"]:
        assert name in header
    accuracy_row = next(line for line in text.splitlines() if line.startswith("accuracy"))
    assert accuracy_row.count("100.0") == 6


def test_json_report_round_trips():
    report = run_dataset(*bundled())
    doc = json.loads(emit_report(report, "json"))
    assert EvalReport.from_dict(doc).same_tallies(report)
    assert list(doc) == sorted(doc)


def test_unknown_report_format():
    with pytest.raises(ValueError):
        emit_report(EvalReport(), "csv")


def test_bad_question_is_recorded_not_raised(tmp_path):
    scenes_path, _ = bundled()
    questions = {
        "questions": [
            {"question_index": 0, "image_index": 0, "answer": "2",
             "program": [{"function": "scene", "inputs": []}, {"function": "count", "inputs": [0]}]},
            {"question_index": 1, "image_index": 0, "answer": "2",
             "program": [{"function": "scene", "inputs": []}, {"function": "frobnicate", "inputs": [0]}]},
            {"question_index": 2, "image_index": 99, "answer": "2",
             "program": [{"function": "scene", "inputs": []}, {"function": "count", "inputs": [0]}]},
        ]
    }
    path = tmp_path / "q.json"
    path.write_text(json.dumps(questions))
    report = run_dataset(scenes_path, path)
    assert report.overall.total == 3
    assert report.overall.correct == 1
    assert report.overall.null_count == 2
    assert report.unclassified.total == 1


def test_malformed_scene_only_fails_its_questions(tmp_path):
    scenes = {"scenes": [{"image_index": 0, "objects": [{"color": "red"}], "relationships": {}}]}
    (tmp_path / "s.json").write_text(json.dumps(scenes))
    loaded = load_scenes(tmp_path / "s.json")
    assert isinstance(loaded[0], MalformedScene)
    q = load_questions(fixture_root() / "questions.json")[1]
    out = evaluate_question(q, loaded, {}, RunOptions())
    assert out.answer.is_null and not out.correct


@pytest.mark.parametrize("content", ["{not json", "[1, 2]", '{"scenes": 3}'])
def test_format_errors(tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    with pytest.raises(FormatError):
        load_scenes(path)


def test_format_error_has_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"questions": [\n  {,}]}')
    with pytest.raises(FormatError, match=r"bad.json:2:"):
        load_questions(path)


def test_generated_dataset_runs_clean(tmp_path):
    scenes, questions = make_dataset(11, 10, 5)
    (tmp_path / "s.json").write_text(json.dumps(scenes))
    (tmp_path / "q.json").write_text(json.dumps(questions))
    for opts in (RunOptions(), RunOptions(via_sentence=True)):
        report = run_dataset(tmp_path / "s.json", tmp_path / "q.json", opts)
        assert report.overall.total == 50
        assert report.accuracy == 1.0


# --- CLI ----------------------------------------------------------------------


def test_cli_run_text(capsys):
    assert cli.main(["run"]) == 0
    out = capsys.readouterr().out
    assert "Compare Attribute" in out and "12/12" in out


def test_cli_run_json_via_sentence(capsys):
    assert cli.main(["run", "--via-sentence", "--report", "json", "--family", "count"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["overall"]["total"] == doc["families"]["Count"]["total"] > 0


def test_cli_run_trace(capsys):
    assert cli.main(["run", "--limit", "1", "--trace"]) == 0
    err = capsys.readouterr().err
    assert "r0(W) :- attribute(W, size, large), attribute(W, color, green)." in err
    assert "answer: no" in err


def test_cli_compile(capsys):
    assert cli.main(["compile", "--question-index", "0"]) == 0
    out = capsys.readouterr().out
    assert "target :- r1(C1), r3(C2), greater_than(C1, C2)." in out
    assert "\\C2\\>\\" in out


def test_cli_compile_missing_question(capsys):
    assert cli.main(["compile", "--question-index", "999"]) == 1


def test_cli_parse(capsys):
    scenes_path, _ = bundled()
    assert cli.main(["parse", "object(W)\\C1\\C\\", "--scenes", str(scenes_path), "--image-index", "0"]) == 0
    out = capsys.readouterr().out
    assert "r1(C) :- count(r0(W), C)." in out
    assert "answer: 2" in out


def test_cli_parse_error(capsys):
    assert cli.main(["parse", "attribute(W, size)\\E\\"]) == 1
    captured = capsys.readouterr()
    assert "answer: NULL" in captured.out
    assert "ParseError" in captured.err


def test_cli_missing_file(capsys, tmp_path):
    assert cli.main(["run", "--scenes", str(tmp_path / "nope.json")]) == 1
    assert "error" in capsys.readouterr().err


def test_cli_format_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("[")
    assert cli.main(["run", "--questions", str(bad)]) == 1


def test_cli_unknown_family(capsys):
    assert cli.main(["run", "--family", "colour"]) == 2


def test_cli_generate_and_fixture_override(capsys, tmp_path, monkeypatch):
    out = tmp_path / "fx"
    assert cli.main(["generate", "--out", str(out), "--scenes", "3", "--questions-per-scene", "5", "--seed", "4"]) == 0
    monkeypatch.setenv(FIXTURES_ENV, str(out))
    assert fixture_root() == out
    capsys.readouterr()
    assert cli.main(["run", "--report", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["overall"]["total"] == 15
    assert doc["overall"]["accuracy"] == 1.0
