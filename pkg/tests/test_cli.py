"""End-to-end command-line interface behavior."""

import json

import pytest

from helpers import oracle_score_tables, treaty_document, treaty_gold_tree
from tdparse.candidates import WindowConfig
from tdparse.cli import main
from tdparse.corpus import load_corpus, save_corpus
from tdparse.synthetic import synthetic_corpus


@pytest.fixture
def corpus_path(tmp_path):
    path = tmp_path / "corpus.jsonl"
    save_corpus(synthetic_corpus(n_docs=3, seed=2), path)
    return path


def _train_args(corpus_path, out_path, *extra):
    return [
        "train",
        "--train", str(corpus_path),
        "--dev", str(corpus_path),
        "--out", str(out_path),
        "--epochs", "1",
        "--embedding-dim", "8",
        "--hidden-dim", "8",
        "--batch-size", "8",
        *extra,
    ]


def test_validate_reports_document_count(corpus_path, capsys):
    assert main(["validate", str(corpus_path)]) == 0
    assert capsys.readouterr().out.strip() == "ok: 3 documents"


def test_validate_rejects_broken_files(tmp_path, capsys):
    path = tmp_path / "broken.jsonl"
    path.write_text("{not json\n", encoding="utf-8")
    assert main(["validate", str(path)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert f"{path}:1" in err


def test_stats_text_output(corpus_path, capsys):
    assert main(["stats", str(corpus_path)]) == 0
    out = capsys.readouterr().out
    assert "documents: 3" in out
    assert "mentions_by_kind" in out


def test_stats_json_output(corpus_path, capsys):
    assert main(["stats", str(corpus_path), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["documents"] == 3
    assert payload["mentions_by_kind"]["dct"] == 3
    assert payload["gold_out_of_window"] == 0


def test_train_writes_model_trace_and_manifest(corpus_path, tmp_path, capsys):
    out = tmp_path / "model.pt"
    assert main(_train_args(corpus_path, out)) == 0
    assert out.exists()

    trace_lines = (tmp_path / "model.pt.trace.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(trace_lines) == 1
    first_epoch = json.loads(trace_lines[0])
    assert first_epoch["epoch"] == 1
    assert set(first_epoch) == {"epoch", "train_loss", "dev_f1"}

    manifest = json.loads((tmp_path / "model.pt.manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "train"
    assert manifest["metrics"]["selected_epoch"] == 1
    assert str(out) in manifest["outputs"]
    assert manifest["seed"] == 0
    assert "saved" in capsys.readouterr().out


def test_train_parse_eval_pipeline(corpus_path, tmp_path, capsys):
    model = tmp_path / "model.pt"
    assert main(_train_args(corpus_path, model)) == 0

    pred = tmp_path / "pred.jsonl"
    traces = tmp_path / "traces.jsonl"
    assert main([
        "parse",
        "--input", str(corpus_path),
        "--out", str(pred),
        "--checkpoint", str(model),
        "--traces", str(traces),
        "--jobs", "2",
    ]) == 0
    predicted = load_corpus(pred)
    assert [doc.doc_id for doc, _ in predicted] == [
        "synthetic-000", "synthetic-001", "synthetic-002",
    ]
    trace_records = [json.loads(line) for line in traces.read_text(encoding="utf-8").splitlines()]
    assert len(trace_records) == 3
    assert all("cycle_skip_fraction" in record for record in trace_records)
    parse_manifest = json.loads((tmp_path / "pred.jsonl.manifest.json").read_text(encoding="utf-8"))
    assert parse_manifest["metrics"]["documents"] == 3

    report_path = tmp_path / "report.json"
    capsys.readouterr()
    assert main([
        "eval", "--pred", str(pred), "--gold", str(corpus_path), "--out", str(report_path),
    ]) == 0
    out = capsys.readouterr().out
    assert "labeled f1:" in out
    assert "parent-category accuracy:" in out
    payload = json.loads(report_path.read_text(encoding="utf-8"))
    assert set(payload) == {"eval", "equivalence"}
    assert 0.0 <= payload["eval"]["f1"] <= 1.0


def test_eval_of_gold_against_itself_is_perfect(corpus_path, tmp_path, capsys):
    assert main(["eval", "--pred", str(corpus_path), "--gold", str(corpus_path)]) == 0
    out = capsys.readouterr().out
    assert "labeled f1: 1.0000" in out
    assert "exactly_correct: 3" in out


def test_eval_document_mismatch_fails(corpus_path, tmp_path, capsys):
    other = tmp_path / "other.jsonl"
    save_corpus(synthetic_corpus(n_docs=1, seed=11), other)
    assert main(["eval", "--pred", str(other), "--gold", str(corpus_path)]) == 1
    assert "document sets differ" in capsys.readouterr().err


def _inject_payload(doc, tree):
    tables = oracle_score_tables(doc, tree, WindowConfig())
    return {
        "doc_id": doc.doc_id,
        "tables": [
            {
                "child": table.child,
                "rows": [
                    {"parent": row.parent, "label": row.label.value, "score": row.score}
                    for row in table.rows
                ],
            }
            for table in tables
        ],
    }


def test_injected_scores_reproduce_the_gold_tree(tmp_path):
    doc, gold = treaty_document(), treaty_gold_tree()
    corpus = tmp_path / "treaty.jsonl"
    save_corpus([(doc, gold)], corpus)
    scores = tmp_path / "scores.jsonl"
    scores.write_text(json.dumps(_inject_payload(doc, gold)) + "\n", encoding="utf-8")

    pred = tmp_path / "pred.jsonl"
    assert main([
        "parse", "--input", str(corpus), "--out", str(pred), "--inject-scores", str(scores),
    ]) == 0
    ((_, predicted_tree),) = load_corpus(pred)
    assert predicted_tree.edges == gold.edges
    manifest = json.loads((tmp_path / "pred.jsonl.manifest.json").read_text(encoding="utf-8"))
    assert manifest["metrics"]["cycle_skip_rate"] == 0.0


def test_injected_scores_must_cover_every_document(tmp_path, capsys):
    doc, gold = treaty_document(), treaty_gold_tree()
    corpus = tmp_path / "treaty.jsonl"
    save_corpus([(doc, gold)], corpus)
    scores = tmp_path / "scores.jsonl"
    scores.write_text("", encoding="utf-8")
    pred = tmp_path / "pred.jsonl"
    assert main([
        "parse", "--input", str(corpus), "--out", str(pred), "--inject-scores", str(scores),
    ]) == 1
    assert "no score tables for document treaty-1998" in capsys.readouterr().err


def test_parse_with_corrupt_checkpoint_fails_cleanly(corpus_path, tmp_path, capsys):
    bogus = tmp_path / "bogus.pt"
    bogus.write_text("junk", encoding="utf-8")
    assert main([
        "parse", "--input", str(corpus_path), "--out", str(tmp_path / "pred.jsonl"),
        "--checkpoint", str(bogus),
    ]) == 1
    err = capsys.readouterr().err
    assert "cannot load checkpoint" in err
    assert "bogus.pt" in err


def test_parse_empty_corpus_is_a_no_op(tmp_path):
    corpus = tmp_path / "empty.jsonl"
    corpus.write_text("", encoding="utf-8")
    scores = tmp_path / "scores.jsonl"
    scores.write_text("", encoding="utf-8")
    pred = tmp_path / "pred.jsonl"
    assert main([
        "parse", "--input", str(corpus), "--out", str(pred), "--inject-scores", str(scores),
    ]) == 0
    assert pred.read_text(encoding="utf-8") == ""
    manifest = json.loads((tmp_path / "pred.jsonl.manifest.json").read_text(encoding="utf-8"))
    assert manifest["metrics"]["documents"] == 0
    assert manifest["metrics"]["cycle_skip_rate"] is None


def test_closure_emits_one_record_per_document(corpus_path, tmp_path):
    out = tmp_path / "closures.jsonl"
    assert main(["closure", "--input", str(corpus_path), "--out", str(out)]) == 0
    records = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines()]
    assert [record["doc_id"] for record in records] == [
        "synthetic-000", "synthetic-001", "synthetic-002",
    ]
    for record in records:
        assert "DCT" in record["nodes"]
        assert all({"a", "b", "relation"} == set(rel) for rel in record["relations"])
    assert (tmp_path / "closures.jsonl.manifest.json").exists()


def test_compare_classifies_documents(corpus_path, tmp_path, capsys):
    out = tmp_path / "equivalence.json"
    assert main([
        "compare", "--pred", str(corpus_path), "--gold", str(corpus_path), "--out", str(out),
    ]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["exactly_correct"] == 3
    assert printed["different"] == 0
    saved = json.loads(out.read_text(encoding="utf-8"))
    assert saved == printed


def test_grid_training_writes_the_grid_summary(corpus_path, tmp_path):
    out = tmp_path / "model.pt"
    assert main(_train_args(
        corpus_path, out, "--grid", "--lr", "0.01,0.001", "--runs", "1",
    )) == 0
    grid = json.loads((tmp_path / "model.pt.grid.json").read_text(encoding="utf-8"))
    assert len(grid["cells"]) == 2
    assert grid["best"]["learning_rate"] in (0.01, 0.001)
    manifest = json.loads((tmp_path / "model.pt.manifest.json").read_text(encoding="utf-8"))
    assert "grid_best" in manifest["metrics"]
    assert out.exists()


def test_version_flag_prints_and_exits(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert capsys.readouterr().out.startswith("tdp ")
