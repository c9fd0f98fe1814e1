# -*- coding: utf-8 -*-
"""
数据读取、PU 划分与玩具数据测试
"""

import numpy as np
import pytest
from scipy.stats import chisquare

from config import DatasetConfig
from core.exceptions import DataFormatError
from services.dataset import (
    ImageSet,
    SyntheticSpec,
    gen_synthetic,
    load_cifar10,
    load_idx,
    load_image_set,
    load_source,
    load_split,
    make_pu_split,
    preprocess,
    save_image_set,
    save_split,
    to_coordinates,
)
from tests.conftest import write_cifar_batch, write_idx_images, write_idx_labels


def _labeled_images(labels, side=4, seed=0):
    rng = np.random.default_rng(seed)
    data = rng.uniform(0.0, 1.0, size=(len(labels), side, side, 1))
    return ImageSet(data=data, labels=np.asarray(labels))


# ---------------------------------------------------------------------------
# IDX / CIFAR-10
# ---------------------------------------------------------------------------


def test_idx_single_zero_image(tmp_path):
    images = write_idx_images(tmp_path / "img", np.zeros((1, 28, 28)))
    labels = write_idx_labels(tmp_path / "lbl", [7])
    loaded = load_idx(images, labels)
    assert loaded.data.shape == (1, 28, 28, 1)
    assert loaded.data.max() == 0.0
    assert loaded.labels.tolist() == [7]


def test_idx_full_intensity_is_one_and_gzip_is_supported(tmp_path):
    images = write_idx_images(tmp_path / "img.gz", np.full((2, 3, 5), 255), compress=True)
    labels = write_idx_labels(tmp_path / "lbl.gz", [1, 2], compress=True)
    loaded = load_idx(images, labels)
    assert loaded.image_shape == (3, 5, 1)
    assert np.all(loaded.data == 1.0)


def test_idx_bad_magic(tmp_path):
    labels = write_idx_labels(tmp_path / "lbl", [0])
    # 标签文件当作图像文件读取
    with pytest.raises(DataFormatError):
        load_idx(labels, labels)


def test_idx_count_mismatch(tmp_path):
    images = write_idx_images(tmp_path / "img", np.zeros((2, 2, 2)))
    labels = write_idx_labels(tmp_path / "lbl", [0, 1, 2])
    with pytest.raises(DataFormatError):
        load_idx(images, labels)


def test_idx_truncated_payload(tmp_path):
    path = write_idx_images(tmp_path / "img", np.zeros((2, 4, 4)))
    path.write_bytes(path.read_bytes()[:-5])
    labels = write_idx_labels(tmp_path / "lbl", [0, 1])
    with pytest.raises(DataFormatError):
        load_idx(path, labels)


def test_cifar_single_black_record(tmp_path):
    path = write_cifar_batch(tmp_path / "b.bin", [9], np.zeros((1, 3, 32, 32)))
    loaded = load_cifar10([path])
    assert loaded.data.shape == (1, 32, 32, 3)
    assert loaded.labels.tolist() == [9]
    assert loaded.data.max() == 0.0


def test_cifar_record_boundaries_and_channel_order(tmp_path):
    planes = np.zeros((2, 3, 32, 32), dtype=np.uint8)
    planes[0, 0, 0, 0] = 255  # 第一条记录的 R 平面左上角
    planes[1, 2, 31, 31] = 255  # 第二条记录的 B 平面右下角
    path = write_cifar_batch(tmp_path / "b.bin", [3, 4], planes)
    assert path.stat().st_size == 2 * 3073

    loaded = load_cifar10([path])
    assert loaded.labels.tolist() == [3, 4]
    assert loaded.data[0, 0, 0].tolist() == [1.0, 0.0, 0.0]
    assert loaded.data[1, 31, 31].tolist() == [0.0, 0.0, 1.0]
    assert loaded.data.sum() == 2.0


def test_cifar_bad_length(tmp_path):
    path = tmp_path / "b.bin"
    path.write_bytes(b"\x00" * 3000)
    with pytest.raises(DataFormatError):
        load_cifar10([path])


# ---------------------------------------------------------------------------
# PU 划分
# ---------------------------------------------------------------------------


def test_pu_split_sizes_and_disjointness():
    labels = np.tile(np.arange(10), 10)
    train = _labeled_images(labels)
    test = _labeled_images(np.arange(10), seed=1)
    split = make_pu_split(train, {0, 2, 4, 6}, 25, test, seed=3)

    assert split.summary() == {"positive_labeled": 25, "unlabeled": 75, "test": 10}
    assert not set(split.positive_labeled.indices) & set(split.unlabeled.indices)
    assert np.all(np.isin(labels[split.positive_labeled.indices], [0, 2, 4, 6]))
    assert split.unlabeled.labels is None
    # 40 个正样本中 25 个被标注
    assert split.evaluation_truth().sum() == 15
    assert split.test.labels.tolist() == [1, 0, 1, 0, 1, 0, 1, 0, 0, 0]


def test_pu_split_is_deterministic():
    train = _labeled_images(np.tile(np.arange(4), 20))
    test = _labeled_images(np.arange(4), seed=1)
    a = make_pu_split(train, {1}, 10, test, seed=7)
    b = make_pu_split(train, {1}, 10, test, seed=7)
    np.testing.assert_array_equal(a.positive_labeled.indices, b.positive_labeled.indices)


def test_pu_split_labels_positives_completely_at_random():
    labels = np.tile(np.arange(4), 25)
    train = _labeled_images(labels)
    test = _labeled_images(np.arange(4), seed=1)
    positive_rows = np.flatnonzero(np.isin(labels, [1, 3]))
    counts = np.zeros(len(labels), dtype=np.int64)
    n_seeds = 2000
    for seed in range(n_seeds):
        split = make_pu_split(train, {1, 3}, 10, test, seed=seed)
        counts[split.positive_labeled.indices] += 1
        # 每次恰好标注 10/50 的正样本
        hidden = split.evaluation_truth().sum()
        assert 10 / (10 + hidden) == pytest.approx(0.2)

    assert counts[np.isin(labels, [0, 2])].sum() == 0
    frequency = counts[positive_rows] / n_seeds
    assert frequency.mean() == pytest.approx(0.2)
    assert np.all(np.abs(frequency - 0.2) < 0.05)
    # 标注概率与原始子类无关
    assert abs(frequency[labels[positive_rows] == 1].mean() - frequency[labels[positive_rows] == 3].mean()) < 0.02
    assert chisquare(counts[positive_rows]).pvalue > 0.001


def test_pu_split_exhausting_positives_leaves_no_hidden_positives():
    train = _labeled_images([0, 1, 1, 0, 1])
    test = _labeled_images([0, 1], seed=1)
    split = make_pu_split(train, {1}, 3, test, seed=0)
    assert split.evaluation_truth().sum() == 0
    assert len(split.unlabeled) == 2


def test_pu_split_errors():
    train = _labeled_images([0, 1, 1])
    test = _labeled_images([0, 1], seed=1)
    with pytest.raises(ValueError):
        make_pu_split(train, {1}, 3, test, seed=0)
    with pytest.raises(ValueError):
        make_pu_split(train, {5, 6}, 1, test, seed=0)


def test_hidden_truth_is_returned_as_copy():
    train = _labeled_images([0, 1, 1, 0])
    split = make_pu_split(train, {1}, 1, _labeled_images([1], seed=1), seed=0)
    truth = split.evaluation_truth()
    truth[:] = 9
    assert split.evaluation_truth().max() <= 1


# ---------------------------------------------------------------------------
# 预处理
# ---------------------------------------------------------------------------


def test_preprocess_upscales_and_replicates_channels():
    images = _labeled_images([0, 1], side=28)
    result = preprocess(images, (32, 32, 3))
    assert result.data.shape == (2, 32, 32, 3)
    np.testing.assert_array_equal(result.data[..., 0], result.data[..., 1])
    np.testing.assert_array_equal(result.data[..., 0], result.data[..., 2])
    assert result.labels.tolist() == [0, 1]


def test_preprocess_identity_and_constant():
    images = _labeled_images([0, 1, 2], side=6)
    same = preprocess(images, (6, 6, 1))
    assert same.data.tobytes() == images.data.tobytes()

    constant = ImageSet(data=np.full((1, 4, 4, 1), 0.25))
    upscaled = preprocess(constant, (8, 8, 3))
    assert np.all(upscaled.data == np.float32(0.25))


def test_preprocess_rejects_downscale():
    with pytest.raises(ValueError):
        preprocess(_labeled_images([0], side=8), (4, 4, 1))


# ---------------------------------------------------------------------------
# 玩具数据
# ---------------------------------------------------------------------------


def test_blobs_construction(blobs_split):
    assert len(blobs_split.positive_labeled) == 100
    assert len(blobs_split.unlabeled) == 1000
    assert blobs_split.evaluation_truth().sum() == 500
    assert blobs_split.positive_labeled.image_shape == (1, 1, 2)
    coords = to_coordinates(blobs_split.positive_labeled, blobs_split)
    # 正类中心 (0,0)，σ=0.5
    assert np.abs(coords.mean(axis=0)).max() < 0.2


def test_blobs_is_deterministic(blobs_split):
    again = gen_synthetic(SyntheticSpec(generator="blobs"), seed=0)
    np.testing.assert_array_equal(again.unlabeled.data, blobs_split.unlabeled.data)
    np.testing.assert_array_equal(again.evaluation_truth(), blobs_split.evaluation_truth())


def test_rings_positives_lie_on_inner_circle():
    split = gen_synthetic(SyntheticSpec(generator="rings", noise=0.05), seed=1)
    radius = np.linalg.norm(to_coordinates(split.positive_labeled, split), axis=1)
    assert abs(radius.mean() - 1.0) < 0.05
    assert np.abs(radius - 1.0).max() < 0.3


@pytest.mark.parametrize(
    "spec",
    [
        SyntheticSpec(generator="spiral"),
        SyntheticSpec(n_labeled=0),
        SyntheticSpec(n_unlabeled=-5),
        SyntheticSpec(noise=0.0),
    ],
)
def test_synthetic_spec_errors(spec):
    with pytest.raises(ValueError):
        gen_synthetic(spec, seed=0)


# ---------------------------------------------------------------------------
# 落盘与数据来源
# ---------------------------------------------------------------------------


def test_image_set_storage_is_lossless(tmp_path):
    images = _labeled_images([3, 1, 4], side=5)
    save_image_set(images, tmp_path / "x.dpu")
    loaded = load_image_set(tmp_path / "x.dpu")
    np.testing.assert_array_equal(loaded.data, images.data)
    np.testing.assert_array_equal(loaded.labels, images.labels)
    np.testing.assert_array_equal(loaded.indices, images.indices)


def test_split_storage_round_trip(tmp_path, blobs_split):
    save_split(blobs_split, tmp_path / "split")
    loaded = load_split(tmp_path / "split")
    np.testing.assert_array_equal(loaded.unlabeled.data, blobs_split.unlabeled.data)
    np.testing.assert_array_equal(loaded.evaluation_truth(), blobs_split.evaluation_truth())
    np.testing.assert_array_equal(loaded.test.labels, blobs_split.test.labels)
    assert loaded.unlabeled.labels is None
    assert loaded.positive_class_ids == blobs_split.positive_class_ids
    assert loaded.meta["coord_scale"] == blobs_split.meta["coord_scale"]


def test_load_source_reads_local_fmnist_files(tmp_path):
    directory = tmp_path / "fashion-mnist"
    directory.mkdir()
    rng = np.random.default_rng(0)
    train_labels = np.tile(np.arange(10), 3)
    write_idx_images(directory / "train-images-idx3-ubyte", rng.integers(0, 256, size=(30, 4, 4)))
    write_idx_labels(directory / "train-labels-idx1-ubyte", train_labels)
    write_idx_images(directory / "t10k-images-idx3-ubyte.gz", rng.integers(0, 256, size=(10, 4, 4)), compress=True)
    write_idx_labels(directory / "t10k-labels-idx1-ubyte.gz", np.arange(10), compress=True)

    cfg = DatasetConfig(source="fmnist", root=str(tmp_path), n_labeled=4, max_unlabeled=10, target_shape=(8, 8, 3))
    split = load_source(cfg, seed=0)

    assert split.summary() == {"positive_labeled": 4, "unlabeled": 10, "test": 10}
    assert split.positive_labeled.image_shape == (8, 8, 3)
    assert split.positive_class_ids == frozenset({0, 2, 4, 6})
    assert split.meta["source"] == "fmnist"


def test_load_source_missing_files(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_source(DatasetConfig(source="cifar10", root=str(tmp_path)), seed=0)


def test_load_source_synthetic_uses_config_sizes():
    cfg = DatasetConfig(source="blobs", n_labeled=20, n_unlabeled=200, n_test=50)
    split = load_source(cfg, seed=4)
    assert split.summary() == {"positive_labeled": 20, "unlabeled": 200, "test": 50}
