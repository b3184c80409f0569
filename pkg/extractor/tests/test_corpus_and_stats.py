"""Corpus emission counting, manifests, and statistics."""

import json

import pytest

from canast.corpus import emit_corpus
from canast.extract import extract_ast
from canast.records import record_to_line, validate_record
from canast.stats import corpus_stats


def _write_corpus(root, problems):
    for name, files in problems.items():
        d = root / name
        d.mkdir(parents=True)
        for fname, text in files.items():
            (d / fname).write_text(text)


def test_two_problems_two_files_each(tmp_path):
    _write_corpus(
        tmp_path / "corpus",
        {
            "p00": {"s0.py": "a = 1\n", "s1.py": "b = 2\n"},
            "p01": {"s0.py": "print(1)\n", "s1.py": "print(2)\n"},
        },
    )
    out = tmp_path / "out.jsonl"
    result = emit_corpus(tmp_path / "corpus", "python", out)
    assert result.records == 4
    assert result.counts == [2, 2]
    assert result.parse_failures == 0
    lines = [json.loads(x) for x in out.read_text().splitlines()]
    assert [r["label"] for r in lines] == [0, 0, 1, 1]
    for rec in lines:
        validate_record(rec)
    manifest = json.loads(result.manifest_path.read_text())
    assert manifest["labels"] == ["p00", "p01"]
    assert manifest["counts"] == [2, 2]
    assert manifest["parse_failures"] == 0
    assert manifest["parser"].startswith("cpython-ast")


def test_unparsable_file_counted_not_dropped(tmp_path):
    _write_corpus(
        tmp_path / "corpus",
        {
            "p00": {"good.py": "a = 1\n", "bad.py": "a = (\n"},
            "p01": {"ok.py": "b = 2\n", "fine.py": "c = 3\n"},
        },
    )
    result = emit_corpus(tmp_path / "corpus", "python", tmp_path / "out.jsonl")
    assert result.records == 3
    assert result.parse_failures == 1
    assert result.counts == [1, 2]


def test_non_source_files_ignored(tmp_path):
    _write_corpus(tmp_path / "corpus", {"p00": {"a.py": "x = 1\n", "notes.txt": "hi"}})
    result = emit_corpus(tmp_path / "corpus", "python", tmp_path / "out.jsonl")
    assert result.records == 1


def test_emission_is_byte_deterministic(tmp_path):
    _write_corpus(tmp_path / "corpus", {"p00": {"a.py": "def f():\n    return 1\n"}})
    out1, out2 = tmp_path / "o1.jsonl", tmp_path / "o2.jsonl"
    emit_corpus(tmp_path / "corpus", "python", out1)
    emit_corpus(tmp_path / "corpus", "python", out2)
    assert out1.read_bytes() == out2.read_bytes()


def test_stats_on_single_record(tmp_path):
    rec = extract_ast("a = 1", "python")
    rec["source_id"] = "one"
    rec["label"] = 0
    path = tmp_path / "single.jsonl"
    path.write_text(record_to_line(rec) + "\n")
    report = corpus_stats(path)
    assert report.records == 1
    assert report.avg_nodes == 7
    assert report.avg_hyperedges == 6
    assert report.ast_node_types == 5  # Module, Assign, Name, Store, Constant
    assert report.edge_types == 5  # body, targets, value, id, ctx


def test_stats_empty_file_rejected(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    with pytest.raises(ValueError):
        corpus_stats(path)
