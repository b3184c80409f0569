"""CLI behaviours: exit codes, artifacts, determinism of reports."""

import json

import numpy as np
import pytest

from hdhgn import ast_io
from hdhgn.cli import main

from test_training import toy_records
from fixtures_data import a_eq_1_record


@pytest.fixture
def corpus(tmp_path):
    path = tmp_path / "corpus.jsonl"
    ast_io.write_jsonl(path, toy_records(num_classes=3, per_class=8))
    return path


@pytest.fixture
def run_config(tmp_path, corpus):
    cfg = {
        "seed": 3,
        "variant": "full",
        "model": {
            "layers": 1,
            "embed_dim": 8,
            "hidden_dim": 8,
            "heads": 2,
            "dropout": 0.0,
            "num_classes": 0,
        },
        "train": {
            "epochs": 2,
            "batch_size": 4,
            "learning_rate": 0.01,
            "trials": 2,
            "split_ratios": [0.6, 0.2, 0.2],
            "min_identifier_freq": 1,
        },
        "paths": {
            "corpus": str(corpus),
            "cache_dir": str(tmp_path / "cache"),
            "checkpoint": str(tmp_path / "model.ckpt"),
            "report_dir": str(tmp_path / "reports"),
        },
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg))
    return path


def test_build_writes_cache_and_vocab(tmp_path, corpus, capsys):
    out_dir = tmp_path / "built"
    code = main(["build", "--in", str(corpus), "--out", str(out_dir), "--min-freq", "1"])
    assert code == 0
    assert (out_dir / "dataset.hdgc").exists()
    assert (out_dir / "vocab.json").exists()
    printed = capsys.readouterr().out
    assert "graphs: 24" in printed
    assert "edge types" in printed


def test_build_rejects_malformed_line(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text(json.dumps(a_eq_1_record()) + "\n{oops\n")
    code = main(["build", "--in", str(bad), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "line 2" in capsys.readouterr().err


def test_build_missing_input_is_io_error(tmp_path):
    code = main(["build", "--in", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path / "o")])
    assert code == 3


def test_unknown_config_key_rejected(tmp_path, run_config, capsys):
    obj = json.loads(run_config.read_text())
    obj["extra_key"] = 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(obj))
    assert main(["train", "--config", str(bad)]) == 4
    obj = json.loads(run_config.read_text())
    obj["model"]["hidden_size"] = 64
    bad.write_text(json.dumps(obj))
    assert main(["train", "--config", str(bad)]) == 4


def test_train_writes_artifacts_and_is_deterministic(tmp_path, run_config):
    assert main(["train", "--config", str(run_config)]) == 0
    cfg = json.loads(run_config.read_text())
    ckpt = tmp_path / "model.ckpt"
    report_dir = tmp_path / "reports"
    assert ckpt.exists()
    report = report_dir / "train-report.json"
    frozen = report_dir / "config.resolved.json"
    metrics = report_dir / "metrics.jsonl"
    assert report.exists() and frozen.exists() and metrics.exists()
    first_report = report.read_bytes()
    first_ckpt = ckpt.read_bytes()
    assert main(["train", "--config", str(run_config)]) == 0
    assert report.read_bytes() == first_report
    assert ckpt.read_bytes() == first_ckpt
    assert json.loads(frozen.read_text())["seed"] == cfg["seed"]


def test_trials_report_shape(tmp_path, run_config, capsys):
    assert main(["trials", "--config", str(run_config)]) == 0
    report = json.loads((tmp_path / "reports" / "trials-full.json").read_text())
    assert len(report["test_accuracies"]) == 2
    assert "mean" in report and "sd" in report
    out = capsys.readouterr().out
    assert "mean" in out


def test_ablate_emits_four_variant_table(tmp_path, run_config, capsys):
    assert main(["ablate", "--config", str(run_config)]) == 0
    table = capsys.readouterr().out
    for variant in ("full", "no_hyperedge", "no_hetero", "no_direction"):
        assert variant in table
    combined = json.loads((tmp_path / "reports" / "ablation.json").read_text())
    assert set(combined) == {"full", "no_hyperedge", "no_hetero", "no_direction"}


def test_eval_prints_accuracy(tmp_path, run_config, capsys):
    assert main(["train", "--config", str(run_config)]) == 0
    capsys.readouterr()
    assert main(["eval", "--config", str(run_config)]) == 0
    assert "test accuracy" in capsys.readouterr().out


def test_predict_flow(tmp_path, run_config, corpus, capsys):
    assert main(["train", "--config", str(run_config)]) == 0
    out_path = tmp_path / "preds.jsonl"
    code = main(
        [
            "predict",
            "--checkpoint",
            str(tmp_path / "model.ckpt"),
            "--in",
            str(corpus),
            "--out",
            str(out_path),
        ]
    )
    assert code == 0
    lines = [json.loads(x) for x in out_path.read_text().splitlines()]
    assert len(lines) == 24
    assert set(lines[0]) == {"source_id", "pred_label", "probs"}
    assert "accuracy" in capsys.readouterr().out


def test_predict_empty_input(tmp_path, run_config, capsys):
    assert main(["train", "--config", str(run_config)]) == 0
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    out_path = tmp_path / "empty-preds.jsonl"
    code = main(
        ["predict", "--checkpoint", str(tmp_path / "model.ckpt"), "--in", str(empty), "--out", str(out_path)]
    )
    assert code == 0
    assert out_path.read_text() == ""


def test_predict_detects_digest_mismatch(tmp_path, run_config, corpus, capsys):
    assert main(["train", "--config", str(run_config)]) == 0
    ckpt = tmp_path / "model.ckpt"
    blob = bytearray(ckpt.read_bytes())
    # flip the stored digest inside the JSON header
    idx = blob.find(b'"vocab_digest":"')
    assert idx > 0
    pos = idx + len(b'"vocab_digest":"')
    blob[pos] = ord("0") if blob[pos] != ord("0") else ord("1")
    ckpt.write_bytes(bytes(blob))
    code = main(["predict", "--checkpoint", str(ckpt), "--in", str(corpus)])
    assert code == 6
    assert "digest" in capsys.readouterr().err


def test_gradcheck_pass_and_fault_injection(monkeypatch, capsys):
    assert main(["gradcheck", "--seed", "4"]) == 0
    assert "PASS" in capsys.readouterr().out

    import hdhgn.tensor as tensor_module

    real_elu = tensor_module.elu

    def corrupt_elu(a):
        pos = a.data > 0
        data = np.where(pos, a.data, np.expm1(a.data))

        def bwd(g):
            if a.requires_grad:
                a.accum_grad(g * np.where(pos, 1.0, data + 1.0) * 1.5)

        return tensor_module._make(data, bwd, a)

    monkeypatch.setattr(tensor_module, "elu", corrupt_elu)
    code = main(["gradcheck", "--seed", "4"])
    monkeypatch.setattr(tensor_module, "elu", real_elu)
    assert code == 7


def test_variant_flag_overrides_config(tmp_path, run_config):
    assert main(["trials", "--config", str(run_config), "--variant", "no_hyperedge"]) == 0
    assert (tmp_path / "reports" / "trials-no_hyperedge.json").exists()


def test_cache_dir_env_override(tmp_path, run_config, monkeypatch):
    override = tmp_path / "env-cache"
    monkeypatch.setenv("HDHGN_CACHE_DIR", str(override))
    assert main(["train", "--config", str(run_config)]) == 0
    assert list(override.glob("*.hdgc")), "expected caches in HDHGN_CACHE_DIR"
