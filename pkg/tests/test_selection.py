# -*- coding: utf-8 -*-
"""
反例挑选测试
"""

import numpy as np
import pytest

from services.anomaly import (
    AnomalyPartition,
    build_forest,
    contamination,
    fit_threshold,
    partition_unlabeled,
)
from services.augmentation import AugmentationSpec, densify
from services.metrics import negative_purity
from services.selection import (
    random_leftovers,
    random_unlabeled,
    rank_leftovers,
    select_negatives,
)


def _partition(scores, leftover):
    scores = np.asarray(scores, dtype=np.float64)
    leftover = np.asarray(leftover)
    inlier = np.setdiff1d(np.arange(len(scores)), leftover)
    return AnomalyPartition(inlier_ids=inlier, leftover_ids=leftover, scores=scores)


def test_forest_score_ordering():
    # a=0, b=1, c=2
    ranked = rank_leftovers(_partition([0.9, 0.6, 0.7, 0.2], [0, 1, 2]), np.zeros((1, 2)))
    assert ranked.ids.tolist() == [0, 2, 1]
    assert ranked.values.tolist() == [0.9, 0.7, 0.6]
    assert ranked.mode == "forest_score"


def test_equal_scores_keep_row_order():
    ranked = rank_leftovers(_partition([0.8, 0.8, 0.8], [2, 0, 1]), np.zeros((1, 1)))
    assert ranked.ids.tolist() == [0, 1, 2]


def test_min_distance_ordering():
    encodings_u = np.array([[1.0, 0.0], [3.0, 0.0]])
    partition = _partition([0.7, 0.9], [0, 1])
    ranked = rank_leftovers(partition, np.array([[0.0, 0.0]]), mode="min_distance", encodings_u=encodings_u)
    assert ranked.ids.tolist() == [1, 0]
    np.testing.assert_allclose(ranked.values, [3.0, 1.0])


def test_min_distance_includes_predicted_inliers():
    encodings_u = np.array([[5.0, 0.0], [6.0, 0.0], [0.0, 9.0]])
    partition = _partition([0.1, 0.9, 0.9], [1, 2])
    ranked = rank_leftovers(partition, np.array([[0.0, 0.0]]), mode="min_distance", encodings_u=encodings_u)
    # (6,0) 离内点 (5,0) 只有1
    assert ranked.ids.tolist() == [2, 1]
    np.testing.assert_allclose(ranked.values, [9.0, 1.0])


def test_min_distance_needs_unlabeled_encodings():
    with pytest.raises(ValueError):
        rank_leftovers(_partition([0.5], [0]), np.zeros((1, 2)), mode="min_distance")


def test_single_leftover():
    ranked = rank_leftovers(_partition([0.2, 0.95], [1]), np.zeros((1, 2)))
    assert len(ranked) == 1
    assert select_negatives(ranked, "match_positives", n_positives=10).tolist() == [1]


def test_rank_errors():
    with pytest.raises(ValueError):
        rank_leftovers(_partition([0.1, 0.2], []), np.zeros((1, 2)))
    with pytest.raises(ValueError):
        rank_leftovers(_partition([0.1], [0]), np.zeros((1, 2)), mode="closest")


def test_match_positives_takes_largest_values():
    rng = np.random.default_rng(0)
    scores = rng.uniform(size=5000)
    ranked = rank_leftovers(_partition(scores, np.arange(5000)), np.zeros((1, 2)))
    selected = select_negatives(ranked, "match_positives", n_positives=1000)
    assert len(selected) == 1000
    assert scores[selected].min() >= np.sort(scores)[-1000]


def test_match_positives_clamps_to_leftovers():
    ranked = rank_leftovers(_partition([0.9, 0.8, 0.7, 0.1], [0, 1, 2]), np.zeros((1, 2)))
    assert len(select_negatives(ranked, "match_positives", n_positives=1000)) == 3


def test_all_leftovers_population():
    ranked = rank_leftovers(_partition([0.9, 0.1, 0.8, 0.7], [0, 2, 3]), np.zeros((1, 2)))
    assert sorted(select_negatives(ranked, "all_leftovers").tolist()) == [0, 2, 3]


def test_random_count_is_deterministic_and_within_leftovers():
    scores = np.linspace(0.0, 1.0, 200)
    ranked = rank_leftovers(_partition(scores, np.arange(100, 200)), np.zeros((1, 2)))
    a = select_negatives(ranked, "random_count", seed=5)
    b = select_negatives(ranked, "random_count", seed=5)
    np.testing.assert_array_equal(a, b)
    assert 1 <= len(a) <= 100
    assert set(a.tolist()) <= set(range(100, 200))
    assert len(set(a.tolist())) == len(a)


def test_unknown_population_mode():
    ranked = rank_leftovers(_partition([0.9], [0]), np.zeros((1, 2)))
    with pytest.raises(ValueError):
        select_negatives(ranked, "everything")


def test_random_baselines():
    partition = _partition(np.linspace(0, 1, 50), np.arange(40, 50))
    chosen = random_leftovers(partition, 4, seed=1)
    assert len(chosen) == 4 and set(chosen.tolist()) <= set(range(40, 50))
    np.testing.assert_array_equal(chosen, random_leftovers(partition, 4, seed=1))
    assert len(random_leftovers(partition, 100, seed=1)) == 10

    naive = random_unlabeled(50, 20, seed=2)
    assert len(naive) == 20 and naive.max() < 50
    with pytest.raises(ValueError):
        random_unlabeled(0, 3, seed=0)


def test_export_frame():
    ranked = rank_leftovers(_partition([0.9, 0.6, 0.7], [0, 1, 2]), np.zeros((1, 2)))
    frame = ranked.to_frame(selected=np.array([0, 2]), sample_ids=np.array([10, 11, 12]))
    assert list(frame.columns) == ["sample_id", "rank_value", "selected_flag"]
    assert frame["sample_id"].tolist() == [10, 12, 11]
    assert frame["selected_flag"].tolist() == [1, 1, 0]


# ---------------------------------------------------------------------------
# 玩具数据上的性质
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def blobs_selection(blobs_split):
    encodings_l = blobs_split.positive_labeled.flat().astype(np.float64)
    encodings_u = blobs_split.unlabeled.flat().astype(np.float64)
    spec = AugmentationSpec(mode="dens", n_pairs=1600, samples_per_pair=11, seed=0)
    embeddings = densify(encodings_l, spec)
    fitting = np.vstack([embeddings.matrix, encodings_l])
    forest = build_forest(fitting, n_trees=100, subsample_size=256, seed=1)
    forest = fit_threshold(forest, fitting, contamination(len(encodings_l), spec.n_pairs, spec.samples_per_pair))
    partition = partition_unlabeled(forest, encodings_u)
    return partition, encodings_l, encodings_u, blobs_split.evaluation_truth()


def test_negatives_never_intersect_inliers(blobs_selection):
    partition, encodings_l, encodings_u, _ = blobs_selection
    for mode in ("forest_score", "min_distance"):
        ranked = rank_leftovers(partition, encodings_l, mode=mode, encodings_u=encodings_u)
        assert np.all(np.diff(ranked.values) <= 0)
        for population in ("match_positives", "all_leftovers", "random_count"):
            selected = select_negatives(ranked, population, n_positives=len(encodings_l), seed=3)
            assert not set(selected.tolist()) & set(partition.inlier_ids.tolist())


def test_top_ranked_leftovers_are_at_least_as_pure(blobs_selection):
    partition, encodings_l, encodings_u, truth = blobs_selection
    ranked = rank_leftovers(partition, encodings_l)
    overall = negative_purity(ranked.ids, truth)
    for q in (0.1, 0.25, 0.5):
        top = ranked.ids[: max(1, int(q * len(ranked)))]
        assert negative_purity(top, truth) >= overall


def test_mined_negatives_are_pure_on_blobs(blobs_selection):
    partition, encodings_l, _, truth = blobs_selection
    ranked = rank_leftovers(partition, encodings_l)
    selected = select_negatives(ranked, "match_positives", n_positives=len(encodings_l))
    assert len(selected) == len(encodings_l)
    assert negative_purity(selected, truth) >= 0.95
