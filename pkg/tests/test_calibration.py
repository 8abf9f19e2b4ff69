"""Threshold-derivation tooling: similarity closed form, corpus
statistics, and the advisory gray-threshold recommendation."""

import logging

import numpy as np
import pytest

from trapsight import calibration
from trapsight.calibration import (
    GrayscaleStats,
    grayscale_stats,
    load_corpus,
    recommend_thresholds,
    similarity_threshold,
    synthetic_corpus,
    write_corpus,
)
from trapsight.errors import ConfigError


def _sample(value, shape=(4, 4), mask_value=255):
    img = np.full(shape, value, dtype=np.uint8)
    mask = np.full(shape, mask_value, dtype=np.uint8)
    return img, mask


# -- similarity_threshold ---------------------------------------------------


def test_similarity_threshold_default_resolution_value():
    assert similarity_threshold(266_000, 3856, 2490) == pytest.approx(
        97.2296, abs=1e-4
    )


@pytest.mark.parametrize(
    "area,w,h,expected",
    [(1, 100, 100, 99.99), (5000, 100, 100, 50.0)],
)
def test_similarity_threshold_small_cases(area, w, h, expected):
    assert similarity_threshold(area, w, h) == pytest.approx(expected)


def test_similarity_threshold_strictly_decreasing_in_area():
    values = [similarity_threshold(a, 200, 200) for a in (1, 10, 100, 1000, 39_999)]
    assert values == sorted(values, reverse=True)
    assert len(set(values)) == len(values)


@pytest.mark.parametrize("area", [0, -5, 40_000, 50_000])
def test_similarity_threshold_rejects_degenerate_area(area):
    with pytest.raises(ConfigError):
        similarity_threshold(area, 200, 200)


# -- grayscale_stats --------------------------------------------------------


def test_stats_single_uniform_sample():
    (stats,) = grayscale_stats([(*_sample(30), "weevil")])
    assert stats.class_name == "weevil"
    assert (stats.mean, stats.min, stats.max) == (30.0, 30, 30)
    assert stats.sample_count == 1


def test_stats_pooled_mean_over_samples():
    corpus = [(*_sample(100), "leaf"), (*_sample(140), "leaf")]
    (stats,) = grayscale_stats(corpus)
    assert stats.mean == pytest.approx(120.0)
    assert (stats.min, stats.max) == (100, 140)


def test_stats_masked_pixels_only():
    img = np.zeros((4, 4), dtype=np.uint8)
    img[0, 0] = 200
    mask = np.zeros((4, 4), dtype=np.uint8)
    mask[0, 0] = 255
    (stats,) = grayscale_stats([(img, mask, "stone")])
    assert (stats.mean, stats.min, stats.max) == (200.0, 200, 200)


def test_stats_first_appearance_order_and_permutation_invariance():
    corpus = [
        (*_sample(30), "weevil"),
        (*_sample(100), "leaf"),
        (*_sample(40), "weevil"),
    ]
    names = [s.class_name for s in grayscale_stats(corpus)]
    assert names == ["weevil", "leaf"]
    shuffled = [corpus[1], corpus[2], corpus[0]]
    by_name = {s.class_name: s for s in grayscale_stats(shuffled)}
    original = {s.class_name: s for s in grayscale_stats(corpus)}
    for name in original:
        assert by_name[name].mean == original[name].mean
        assert by_name[name].min == original[name].min


def test_stats_empty_mask_sample_skipped_with_diagnostic(caplog):
    good = (*_sample(30), "weevil")
    empty = (*_sample(90, mask_value=0), "weevil")
    with caplog.at_level(logging.WARNING, logger="trapsight.calibration"):
        (stats,) = grayscale_stats([good, empty])
    assert stats.sample_count == 1
    assert stats.max == 30
    assert any("mask" in rec.message for rec in caplog.records)


def test_stats_rejects_shape_mismatch_and_empty_corpus():
    img = np.zeros((4, 4), dtype=np.uint8)
    mask = np.full((5, 5), 255, dtype=np.uint8)
    with pytest.raises(ConfigError):
        grayscale_stats([(img, mask, "weevil")])
    with pytest.raises(ConfigError):
        grayscale_stats([])


# -- recommend_thresholds ---------------------------------------------------


def _stat(name, mean, lo, hi):
    return GrayscaleStats(
        class_name=name, sample_count=5, mean=mean, min=lo, max=hi
    )


def test_recommendation_matches_worked_example():
    stats = [_stat("weevil", 35.0, 20, 45), _stat("leaf", 90.0, 70, 120)]
    rec = recommend_thresholds(stats, margin=15)
    assert rec.feasible and rec.t == 60


def test_recommendation_infeasible_when_margin_does_not_fit():
    stats = [_stat("weevil", 35.0, 20, 45), _stat("soil", 55.0, 40, 80)]
    rec = recommend_thresholds(stats, margin=15)
    assert not rec.feasible
    assert rec.t is None
    assert rec.reason


def test_recommendation_requires_both_class_kinds():
    with pytest.raises(ConfigError):
        recommend_thresholds([_stat("weevil", 35.0, 20, 45)])
    with pytest.raises(ConfigError):
        recommend_thresholds([_stat("leaf", 90.0, 70, 120)])


# -- synthetic corpus -------------------------------------------------------


def test_synthetic_corpus_separation_property():
    corpus = synthetic_corpus(seed=42)
    stats = {s.class_name: s for s in grayscale_stats(corpus)}
    weevil = stats.pop("weevil")
    assert weevil.max < 60
    assert all(s.mean > 60 for s in stats.values())
    assert min(s.mean for s in stats.values()) > weevil.max


def test_synthetic_corpus_is_seed_deterministic():
    a = synthetic_corpus(seed=5, samples_per_class=2)
    b = synthetic_corpus(seed=5, samples_per_class=2)
    assert len(a) == len(b) == 8
    for (img_a, mask_a, cls_a), (img_b, mask_b, cls_b) in zip(a, b):
        assert cls_a == cls_b
        assert np.array_equal(img_a, img_b)
        assert np.array_equal(mask_a, mask_b)


def test_corpus_write_load_round_trip(tmp_path):
    corpus = synthetic_corpus(seed=3, samples_per_class=2)
    manifest = write_corpus(corpus, tmp_path / "corpus")
    loaded = load_corpus(manifest)
    assert len(loaded) == len(corpus)
    for (img_a, mask_a, cls_a), (img_b, mask_b, cls_b) in zip(corpus, loaded):
        assert cls_a == cls_b
        assert np.array_equal(img_a, img_b)
        assert np.array_equal(mask_a, mask_b)


def test_stats_table_alignment():
    stats = [_stat("weevil", 35.0, 20, 45), _stat("leaf", 119.25, 88, 150)]
    table = calibration.format_stats_table(stats)
    lines = table.splitlines()
    assert lines[0].startswith("class")
    assert len({len(line) for line in lines if line}) <= 2  # header/body aligned
    assert "weevil" in table and "119.2" in table
