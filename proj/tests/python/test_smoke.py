import json
import math
import os
import shutil

import numpy as np
import pytest

import stfall


def test_roc_auc_hand_values():
    assert stfall.roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0
    assert stfall.roc_auc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0]) == 0.0
    assert stfall.roc_auc([0.5, 0.5, 0.5, 0.5], [1, 1, 0, 0]) == 0.5


def test_roc_auc_rejects_single_class():
    with pytest.raises(ValueError):
        stfall.roc_auc([0.1, 0.2], [0, 0])


def test_shape_report_generator_and_discriminator():
    rows = stfall.shape_report("3dcae-an")
    assert [r[1] for r in rows] == [
        [8, 64, 64, 16],
        [8, 32, 32, 8],
        [4, 16, 16, 8],
        [2, 8, 8, 8],
        [4, 16, 16, 8],
        [8, 32, 32, 8],
        [8, 64, 64, 16],
        [8, 64, 64, 1],
    ]
    disc = stfall.shape_report("3dcae-an", discriminator=True)
    assert disc[-1][1] == [1]
    with pytest.raises(ValueError):
        stfall.shape_report("no-such-family")


def test_preprocess_frames_zero_mean():
    rng = np.random.default_rng(3)
    frames = rng.integers(0, 256, size=(4, 48, 80), dtype=np.uint8)
    out = stfall.preprocess_frames(frames)
    assert out.shape == (4, 64, 64)
    assert out.dtype == np.float32
    assert np.abs(out.mean(axis=(1, 2))).max() < 1e-5
    assert out.min() > -1.0 and out.max() < 1.0


def test_window_labels_alpha_rule():
    labels = [0] * 10 + [1] * 8 + [0] * 10
    starts = list(range(len(labels) - 7))
    assert sum(stfall.window_labels(labels, starts, 8, 8)) == 1
    assert sum(stfall.window_labels(labels, starts, 8, 1)) == 15


def test_pipeline_round_trip(tmp_path):
    data = str(tmp_path / "data")
    manifest = stfall.gen_dataset(data, seed=5, num_adl_videos=2, num_fall_videos=1,
                                  frames_per_video=32)
    assert len(manifest["videos"]) == 3
    assert os.path.exists(os.path.join(data, "labels.csv"))

    model = str(tmp_path / "model")
    history = stfall.train(data, model, family="dae-an", max_epochs=2, seed=5, adl_only=True)
    assert len(history) == 2
    assert all(math.isfinite(e["mean_recon"]) for e in history)

    scores = str(tmp_path / "scores")
    n = stfall.score(model, data, scores)
    assert n == 3
    assert os.path.exists(os.path.join(scores, "scores.csv"))

    report = stfall.evaluate(scores, os.path.join(data, "labels.csv"))
    assert "frame_level" in report
    assert 0.0 <= report["frame_level"]["c_mu"] <= 1.0
