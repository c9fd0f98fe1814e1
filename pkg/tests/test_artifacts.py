# -*- coding: utf-8 -*-
"""
产物读写测试
"""

import struct

import numpy as np
import pandas as pd
import pytest

from core.artifacts import (
    MATRIX_MAGIC,
    read_forest_checkpoint,
    read_json,
    read_matrix,
    read_model_checkpoint,
    read_table,
    write_forest_checkpoint,
    write_json,
    write_matrix,
    write_model_checkpoint,
    write_table,
)
from core.exceptions import DataFormatError


def test_matrix_file_layout(tmp_path):
    path = tmp_path / "z.dpu"
    matrix = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.5]])
    write_matrix(path, matrix)

    raw = path.read_bytes()
    assert raw[:4] == MATRIX_MAGIC
    assert struct.unpack("<II", raw[4:12]) == (2, 3)
    assert len(raw) == 12 + 2 * 3 * 4
    assert struct.unpack("<f", raw[12:16])[0] == 1.0
    # 行优先
    assert struct.unpack("<f", raw[24:28])[0] == 4.0

    loaded = read_matrix(path)
    assert loaded.dtype == np.float32
    np.testing.assert_array_equal(loaded, matrix.astype(np.float32))


def test_matrix_with_zero_rows(tmp_path):
    path = tmp_path / "empty.dpu"
    write_matrix(path, np.zeros((0, 4)))
    assert read_matrix(path).shape == (0, 4)


def test_matrix_rejects_bad_magic_and_truncation(tmp_path):
    bad = tmp_path / "bad.dpu"
    bad.write_bytes(b"XXXX" + struct.pack("<II", 1, 1) + b"\x00" * 4)
    with pytest.raises(DataFormatError):
        read_matrix(bad)

    good = tmp_path / "good.dpu"
    write_matrix(good, np.ones((3, 3)))
    truncated = tmp_path / "truncated.dpu"
    truncated.write_bytes(good.read_bytes()[:-4])
    with pytest.raises(DataFormatError):
        read_matrix(truncated)


def test_matrix_requires_two_dimensions(tmp_path):
    with pytest.raises(ValueError):
        write_matrix(tmp_path / "x.dpu", np.zeros(3))


def test_json_is_written_atomically(tmp_path):
    path = tmp_path / "nested" / "report.json"
    write_json(path, {"b": 1, "a": [1, 2]})
    assert read_json(path) == {"a": [1, 2], "b": 1}
    assert not (tmp_path / "nested" / "report.json.tmp").exists()


def test_table_round_trip(tmp_path):
    path = tmp_path / "scores.csv"
    table = pd.DataFrame({"sample_id": [3, 1], "score": [0.25, 0.75], "flagged": [0, 1]})
    write_table(path, table)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "sample_id,score,flagged"
    pd.testing.assert_frame_equal(read_table(path), table)


def test_model_checkpoint_stores_float32_weights(tmp_path):
    path = tmp_path / "model.ckpt"
    specs = [{"type": "dense", "in_features": 2, "out_features": 1}]
    weights = [np.array([[0.1], [1.0 / 3.0]]), np.array([0.5])]
    write_model_checkpoint(path, specs, weights, meta={"kind": "dense"})

    layers, loaded, meta = read_model_checkpoint(path)
    assert layers == specs
    assert meta == {"kind": "dense"}
    assert [w.shape for w in loaded] == [(2, 1), (1,)]
    np.testing.assert_array_equal(loaded[0], weights[0].astype(np.float32).astype(np.float64))
    assert path.read_bytes()[:4] == b"DPUM"


def test_model_checkpoint_rejects_other_files(tmp_path):
    path = tmp_path / "z.dpu"
    write_matrix(path, np.ones((1, 1)))
    with pytest.raises(DataFormatError):
        read_model_checkpoint(path)


def test_forest_checkpoint_round_trip(tmp_path):
    path = tmp_path / "forest.ckpt"
    tree = {
        "feature": np.array([0, -1, -1]),
        "threshold": np.array([0.123456789, 0.0, 0.0]),
        "left": np.array([1, -1, -1]),
        "right": np.array([2, -1, -1]),
        "size": np.array([4, 1, 3]),
        "depth": np.array([0, 1, 1]),
    }
    write_forest_checkpoint(path, {"subsample_size": 4, "threshold": None}, [tree, tree])

    header, trees = read_forest_checkpoint(path)
    assert header["subsample_size"] == 4
    assert header["node_counts"] == [3, 3]
    assert len(trees) == 2
    for name, values in tree.items():
        np.testing.assert_array_equal(trees[1][name], values)
