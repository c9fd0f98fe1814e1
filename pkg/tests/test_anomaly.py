# -*- coding: utf-8 -*-
"""
孤立森林、阈值与 U 划分测试

树结构用一个独立的朴素模拟器对照：消费同一个随机数流，按同样的顺序切分
"""

import math

import numpy as np
import pytest

from core.exceptions import ShapeMismatchError
from services.anomaly import (
    AnomalyPartition,
    IsolationForest,
    anomaly_score,
    average_path_length,
    build_forest,
    contamination,
    expected_loss,
    fit_threshold,
    partition_unlabeled,
    score_from_path_length,
    threshold_for,
    tree_seeds,
)
from services.augmentation import AugmentationSpec, densify


def _c(m):
    if m <= 1:
        return 0.0
    return 2.0 * (math.log(m - 1) + 0.5772156649) - 2.0 * (m - 1) / m


def _oracle_path_lengths(data, subsample_size, seed_seq):
    """逐点路径长度的朴素实现"""
    rng = np.random.default_rng(seed_seq)
    sample = [int(r) for r in rng.choice(len(data), size=subsample_size, replace=False)]
    limit = math.ceil(math.log2(subsample_size))
    n_features = data.shape[1]
    points = data.tolist()

    def grow(rows, depth):
        if len(rows) <= 1 or depth >= limit:
            return ("leaf", len(rows), depth)
        for _ in range(n_features):
            feature = int(rng.integers(n_features))
            values = [points[r][feature] for r in rows]
            low, high = min(values), max(values)
            if high > low:
                split = float(rng.uniform(low, high))
                left = [r for r in rows if points[r][feature] < split]
                right = [r for r in rows if not points[r][feature] < split]
                return ("split", feature, split, grow(left, depth + 1), grow(right, depth + 1))
        return ("leaf", len(rows), depth)

    root = grow(sample, 0)
    lengths = []
    for x in points:
        node = root
        while node[0] == "split":
            node = node[3] if x[node[1]] < node[2] else node[4]
        lengths.append(node[2] + _c(node[1]))
    return np.asarray(lengths)


# ---------------------------------------------------------------------------
# 森林结构
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("n_features", [1, 2])
def test_trees_match_naive_simulator(n_features):
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(2, 9))
        # 小整数网格制造重复值与零宽度区间
        data = rng.integers(0, 4, size=(n, n_features)).astype(np.float64)
        if seed % 2:
            data = rng.normal(size=(n, n_features))
        forest = build_forest(data, n_trees=3, subsample_size=n, seed=seed)
        lengths = forest.path_lengths(data)
        for t, seed_seq in enumerate(tree_seeds(seed, 3)):
            expected = _oracle_path_lengths(data, n, seed_seq)
            np.testing.assert_allclose(lengths[:, t], expected, rtol=1e-12, atol=0)


def test_eight_distinct_points_single_tree():
    data = np.arange(8, dtype=np.float64).reshape(-1, 1) * 1.5
    forest = build_forest(data, n_trees=1, subsample_size=8, seed=7)
    expected = _oracle_path_lengths(data, 8, tree_seeds(7, 1)[0])
    np.testing.assert_allclose(forest.path_lengths(data)[:, 0], expected, rtol=1e-12)
    # 深度上限 3
    assert forest.trees[0]["depth"].max() <= 3


def test_identical_points_make_a_single_external_node():
    forest = build_forest(np.array([[1.0, 2.0], [1.0, 2.0]]), n_trees=1, subsample_size=2, seed=0)
    tree = forest.trees[0]
    assert tree["feature"].tolist() == [-1]
    assert tree["size"].tolist() == [2]
    assert tree["threshold"].tolist() == [0.0]


def test_average_path_length_values():
    assert average_path_length(0) == 0.0
    assert average_path_length(1) == 0.0
    assert float(average_path_length(2)) == pytest.approx(2 * 0.5772156649 - 1.0, abs=1e-12)
    assert float(average_path_length(256)) == pytest.approx(_c(256), abs=1e-12)


def test_score_normalization():
    for psi in (2, 8, 256):
        assert float(score_from_path_length(average_path_length(psi), psi)) == pytest.approx(0.5, abs=1e-12)
    assert float(score_from_path_length(0.0, 256)) == 1.0
    # 路径越长分数越低
    scores = score_from_path_length(np.array([1.0, 5.0, 20.0]), 256)
    assert np.all(np.diff(scores) < 0)


def test_far_point_attains_maximum_score():
    data = np.array([*range(10), 100], dtype=np.float64).reshape(-1, 1)
    forest = build_forest(data, n_trees=200, subsample_size=11, seed=3)
    scores = forest.score(data)
    assert int(np.argmax(scores)) == 10
    assert np.all((scores > 0.0) & (scores < 1.0))
    assert anomaly_score(forest, np.array([100.0])) == pytest.approx(scores[10])


def test_forest_is_deterministic_and_independent_of_workers():
    data = np.random.default_rng(0).normal(size=(300, 3))
    a = build_forest(data, n_trees=20, subsample_size=64, seed=5)
    b = build_forest(data, n_trees=20, subsample_size=64, seed=5, n_jobs=2)
    np.testing.assert_array_equal(a.score(data), b.score(data))
    c = build_forest(data, n_trees=20, subsample_size=64, seed=6)
    assert not np.array_equal(a.score(data), c.score(data))


def test_subsample_larger_than_data_is_clamped(caplog):
    data = np.random.default_rng(1).normal(size=(10, 2))
    with caplog.at_level("WARNING"):
        forest = build_forest(data, n_trees=2, subsample_size=256, seed=0)
    assert forest.subsample_size == 10
    assert any("截断" in record.getMessage() for record in caplog.records)


def test_build_forest_errors():
    with pytest.raises(ValueError):
        build_forest(np.zeros((1, 2)), n_trees=1, subsample_size=2, seed=0)
    with pytest.raises(ValueError):
        build_forest(np.zeros((5, 2)), n_trees=1, subsample_size=1, seed=0)


def test_dimension_mismatch_on_scoring():
    forest = build_forest(np.random.default_rng(0).normal(size=(20, 3)), n_trees=2, subsample_size=8, seed=0)
    with pytest.raises(ShapeMismatchError):
        forest.score(np.zeros((4, 2)))


def test_forest_checkpoint_preserves_scores(tmp_path):
    data = np.random.default_rng(2).normal(size=(100, 2))
    forest = build_forest(data, n_trees=10, subsample_size=32, seed=4)
    forest = fit_threshold(forest, data, 0.1)
    forest.save(tmp_path / "forest.ckpt")
    loaded = IsolationForest.load(tmp_path / "forest.ckpt")
    assert loaded.threshold == forest.threshold
    assert loaded.contamination == pytest.approx(0.1)
    np.testing.assert_array_equal(loaded.score(data), forest.score(data))


# ---------------------------------------------------------------------------
# contamination 与阈值
# ---------------------------------------------------------------------------


def test_contamination_values():
    assert abs(contamination(1000, 16000, 11) - 1000 / 176000) < 1e-9
    assert abs(contamination(1000, 16000, 11) - 0.0056818181818) < 1e-9
    assert contamination(1, 1, 1) == 1.0
    assert contamination(0, 10, 11) == 0.0
    with pytest.raises(ValueError):
        contamination(5, 0, 11)


def test_threshold_quantile_arithmetic():
    scores = np.linspace(0.1, 1.0, 10)
    threshold = threshold_for(scores, 0.1)
    assert np.sum(scores > threshold) == 1
    assert np.sum(scores > threshold_for(scores, 0.0)) == 0


def test_threshold_ties_flag_fewer_points():
    scores = np.array([0.9, 0.9, 0.9, 0.2, 0.1])
    assert np.sum(scores > threshold_for(scores, 0.2)) == 0


def test_threshold_errors():
    with pytest.raises(ValueError):
        threshold_for(np.zeros(0), 0.1)
    with pytest.raises(ValueError):
        threshold_for(np.ones(3), 1.0)


def test_threshold_calibration_on_fitting_set():
    data = np.random.default_rng(3).normal(size=(1000, 2))
    forest = build_forest(data, n_trees=50, subsample_size=128, seed=1)
    scores = forest.score(data)
    for c in (0.005, 0.05, 0.2):
        fitted = fit_threshold(forest, data, c, scores=scores)
        flagged = int(np.sum(scores > fitted.threshold))
        assert abs(flagged / len(data) - c) <= 1.0 / len(data)


@pytest.fixture(scope="module")
def dense_fit(blobs_split):
    encodings = blobs_split.positive_labeled.flat().astype(np.float64)
    spec = AugmentationSpec(mode="dens", n_pairs=1600, samples_per_pair=11, seed=0)
    embeddings = densify(encodings, spec)
    c = contamination(len(encodings), spec.n_pairs, spec.samples_per_pair)
    fitting = np.vstack([embeddings.matrix, encodings])
    forest = build_forest(fitting, n_trees=100, subsample_size=256, seed=2)
    scores = forest.score(fitting)
    return fit_threshold(forest, fitting, c, scores=scores), fitting, scores, embeddings, c


def test_flagged_count_on_densified_fitting_set(dense_fit):
    forest, fitting, scores, _, c = dense_fit
    flagged = int(np.sum(scores > forest.threshold))
    assert abs(flagged - round(c * len(fitting))) <= 1


def test_embeddings_are_mostly_inliers(dense_fit):
    forest, _, _, embeddings, c = dense_fit
    partition = partition_unlabeled(forest, embeddings.matrix[:2000])
    assert partition.n_leftovers / 2000 <= c + 0.01


def test_far_away_vector_becomes_leftover(dense_fit):
    forest, _, _, embeddings, _ = dense_fit
    z_u = np.vstack([embeddings.matrix[:50], np.full((1, 2), 100.0)])
    partition = partition_unlabeled(forest, z_u)
    assert 50 in partition.leftover_ids
    assert partition.n_inliers + partition.n_leftovers == 51
    assert not set(partition.inlier_ids) & set(partition.leftover_ids)


def test_empty_unlabeled_set_gives_empty_partition(dense_fit):
    forest = dense_fit[0]
    partition = partition_unlabeled(forest, np.zeros((0, 2)))
    assert partition.n_inliers == 0 and partition.n_leftovers == 0


def test_partition_requires_threshold():
    forest = build_forest(np.random.default_rng(0).normal(size=(20, 2)), n_trees=2, subsample_size=8, seed=0)
    with pytest.raises(ValueError):
        partition_unlabeled(forest, np.zeros((3, 2)))


def test_partition_frame_round_trip():
    partition = AnomalyPartition(inlier_ids=[0, 2], leftover_ids=[1, 3], scores=[0.3, 0.8, 0.4, 0.9])
    frame = partition.to_frame(np.array([10, 11, 12, 13]))
    assert frame["sample_id"].tolist() == [10, 11, 12, 13]
    assert frame["flagged"].tolist() == [0, 1, 0, 1]
    again = AnomalyPartition.from_frame(frame)
    assert again.leftover_ids.tolist() == [1, 3]
    assert again.inlier_ids.tolist() == [0, 2]


def test_partition_rejects_overlap_and_missing_ids():
    with pytest.raises(ValueError):
        AnomalyPartition(inlier_ids=[0, 1], leftover_ids=[1], scores=[0.1, 0.2])
    with pytest.raises(ValueError):
        AnomalyPartition(inlier_ids=[0], leftover_ids=[1], scores=[0.1, 0.2, 0.3])


# ---------------------------------------------------------------------------
# 期望损失
# ---------------------------------------------------------------------------


def test_expected_loss_values():
    assert expected_loss([0.3, 0.4], [0.6, 0.9], 0.5, 0.5) == 0.0
    assert expected_loss([0.1, 0.2], [0.8], 0.5, 0.01) == 0.0
    # 阈值低于所有分数：全部判为离群
    assert expected_loss([0.3, 0.4], [0.6, 0.9], 0.0, 0.2) == pytest.approx(0.8)
    # 一半离群点漏检、一半内点误报
    assert expected_loss([0.3, 0.7], [0.4, 0.9], 0.5, 0.25) == pytest.approx(0.25 * 0.5 + 0.75 * 0.5)


def test_expected_loss_needs_both_sides():
    with pytest.raises(ValueError):
        expected_loss([], [0.5], 0.5, 0.1)
