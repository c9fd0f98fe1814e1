# -*- coding: utf-8 -*-
"""
流水线配置测试
"""

import pytest

from config import (
    config_hash,
    config_to_flat,
    load_pipeline_config,
    profile_defaults,
    save_pipeline_config,
)


def test_paper_profile_uses_full_scale_settings():
    config = profile_defaults("paper", "fmnist")
    assert config.augment.n_pairs == 16000
    assert config.augment.samples_per_pair == 11
    assert config.augment.k == 0.2
    assert config.forest.n_trees == 1000
    assert config.forest.subsample_size == 256
    assert config.autoencoder.filters == (64, 32, 8)
    assert config.autoencoder.latent_dim == 512
    assert config.autoencoder.batch_size == 64
    assert config.classifier.batch_size == 32
    assert config.classifier.epochs == 200
    assert config.dataset.target_shape == (32, 32, 3)


def test_desk_profile_scales_down():
    config = profile_defaults("desk", "fmnist")
    assert config.dataset.max_unlabeled == 6000
    # 0 表示按 16·|P_L| 自动确定
    assert config.augment.n_pairs == 0
    assert config.forest.n_trees == 200
    assert config.forest.subsample_size == 256
    assert config.autoencoder.latent_dim == 64
    assert config.repeats == 3


def test_unknown_profile_is_rejected():
    with pytest.raises(ValueError):
        profile_defaults("huge", "fmnist")


def test_file_values_and_overrides_are_merged(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text(
        "# 注释行\n"
        "profile = desk\n"
        "dataset.source = blobs\n"
        "augment.k = 0.3\n"
        "forest.n_trees = 80\n"
        "forest.contamination = none\n"
        "autoencoder.hidden = 12,6\n",
        encoding="utf-8",
    )
    config = load_pipeline_config(path, overrides={"seed": 5, "forest__n_trees": "50", "out_dir": None})

    assert config.dataset.source == "blobs"
    assert config.augment.k == pytest.approx(0.3)
    assert config.forest.n_trees == 50
    assert config.forest.contamination is None
    assert config.autoencoder.hidden == (12, 6)
    assert config.seed == 5
    # 玩具数据的 desk 默认值
    assert config.autoencoder.latent_activation == "identity"


def test_source_override_selects_matching_defaults():
    config = load_pipeline_config(None, overrides={"dataset.source": "rings"})
    assert config.dataset.source == "rings"
    assert config.dataset.n_labeled == 100


def test_missing_config_file_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_pipeline_config(tmp_path / "missing.conf")


@pytest.mark.parametrize(
    "overrides",
    [
        {"augment.mode": "cutmix"},
        {"augment.k": "1.5"},
        {"forest.subsample_size": "1"},
        {"selection.population": "everything"},
        {"nosuch.key": "1"},
        {"augment.unknown": "1"},
        {"forest.n_trees": "many"},
    ],
)
def test_invalid_values_are_rejected(overrides):
    with pytest.raises(ValueError):
        load_pipeline_config(None, overrides=overrides)


def test_saved_config_loads_back_identically(tmp_path):
    config = profile_defaults("desk", "blobs")
    config.seed = 11
    config.forest.contamination = 0.01
    path = tmp_path / "config.conf"
    save_pipeline_config(config, path)

    loaded = load_pipeline_config(path)
    assert config_to_flat(loaded) == config_to_flat(config)
    assert config_hash(loaded) == config_hash(config)


def test_config_hash_ignores_output_directory():
    a = profile_defaults("desk", "blobs")
    b = a.replace(out_dir="somewhere/else")
    c = a.replace(seed=1)
    assert config_hash(a) == config_hash(b)
    assert config_hash(a.replace(**{"forest.n_jobs": 4})) == config_hash(a)
    assert config_hash(a) != config_hash(c)
    assert len(config_hash(a)) == 16


def test_replace_copies_sections():
    base = profile_defaults("desk", "blobs")
    changed = base.replace(**{"augment.mode": "mixup", "selection__strategy": "random_leftovers"})
    assert changed.augment.mode == "mixup"
    assert changed.selection.strategy == "random_leftovers"
    assert base.augment.mode == "dens"
    assert base.selection.strategy == "anomaly"
