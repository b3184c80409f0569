"""Multi-trial protocol, ablation harness, and the gradient-check oracle."""

import math

import numpy as np
import pytest

import hdhgn.tensor as tensor_module
from hdhgn.experiments import (
    ablation_table,
    gradient_check,
    mean_sd,
    run_ablation,
    run_trials,
)
from hdhgn.model import ModelConfig
from hdhgn.training import TrainConfig

from test_training import tiny_model, tiny_train, toy_records


def test_mean_sd_hand_arithmetic():
    mean, sd = mean_sd([0.9, 1.0])
    assert abs(mean - 0.95) < 1e-12
    assert abs(sd - math.sqrt(0.005)) < 1e-12  # 0.07071067811865475


def test_single_trial_reports_zero_sd_with_flag():
    report = run_trials(tiny_train(trials=1, epochs=1), tiny_model(), toy_records())
    assert report.single_trial
    assert report.sd == 0.0
    assert len(report.trials) == 1


def test_trials_use_consecutive_seeds_and_resplit():
    cfg = tiny_train(trials=3, epochs=1, seed=10)
    report = run_trials(cfg, tiny_model(), toy_records())
    assert [t.seed for t in report.trials] == [10, 11, 12]
    mean, sd = mean_sd([t.test_accuracy for t in report.trials])
    assert abs(report.mean - mean) < 1e-12
    assert abs(report.sd - sd) < 1e-12


def test_run_trials_reproducible():
    cfg = tiny_train(trials=2, epochs=2, seed=5)
    a = run_trials(cfg, tiny_model(), toy_records())
    b = run_trials(cfg, tiny_model(), toy_records())
    assert a.to_obj() == b.to_obj()


def test_ablation_covers_variants_and_full_matches_plain_trials():
    cfg = tiny_train(trials=1, epochs=1, seed=3)
    reports = run_ablation(cfg, tiny_model(), toy_records())
    assert set(reports) == {"full", "no_hyperedge", "no_hetero", "no_direction"}
    plain = run_trials(cfg, tiny_model(), toy_records())
    assert reports["full"].to_obj() == plain.to_obj()
    table = ablation_table(reports)
    assert table.count("\n") >= 4
    for variant in reports:
        assert variant in table


def test_gradient_check_passes_and_is_repeatable():
    a = gradient_check(seed=0)
    b = gradient_check(seed=0)
    assert a.max_rel_err < 1e-4
    assert a.max_rel_err == b.max_rel_err
    assert a.coords_checked >= 200


def test_gradient_check_detects_corrupted_backward(monkeypatch):
    real_elu = tensor_module.elu

    def corrupt_elu(a):
        pos = a.data > 0
        data = np.where(pos, a.data, np.expm1(a.data))

        def bwd(g):
            if a.requires_grad:
                a.accum_grad(g * np.where(pos, 1.0, data + 1.0) * 1.5)

        return tensor_module._make(data, bwd, a)

    monkeypatch.setattr(tensor_module, "elu", corrupt_elu)
    report = gradient_check(seed=0)
    monkeypatch.setattr(tensor_module, "elu", real_elu)
    assert report.max_rel_err > 1e-2
