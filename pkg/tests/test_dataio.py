import struct

import numpy as np
import pytest

from scrlm import DatasetFormatError, load_dataset, save_dataset
from scrlm.dataio import (cells_to_csv, load_binary, load_csv, load_results,
                          results_to_json, save_binary, save_csv, save_results)


@pytest.fixture
def data():
    rng = np.random.Generator(np.random.SFC64(55))
    return rng.normal(size=(17, 5)) * 1e3


@pytest.fixture
def labels():
    rng = np.random.Generator(np.random.SFC64(56))
    out = rng.integers(1, 4, size=17)
    out[::5] = -1
    return out


class TestCsv:
    def test_roundtrip_bit_exact(self, tmp_path, data, labels):
        path = tmp_path / "d.csv"
        save_csv(path, data, labels)
        got, got_labels = load_csv(path, with_labels=True)
        assert np.array_equal(got, data)
        assert np.array_equal(got_labels, labels)

    def test_roundtrip_without_labels(self, tmp_path, data):
        path = tmp_path / "d.csv"
        save_csv(path, data)
        assert np.array_equal(load_csv(path), data)

    def test_two_by_two_literal(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("1.0,2.0\n3.0,4.0\n")
        got = load_csv(path)
        assert got.shape == (2, 2)
        assert got.tolist() == [[1.0, 2.0], [3.0, 4.0]]

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(DatasetFormatError, match="line 2"):
            load_csv(path)

    def test_nan_rejected(self, tmp_path):
        path = tmp_path / "n.csv"
        path.write_text("1.0,nan\n")
        with pytest.raises(DatasetFormatError, match="non-finite"):
            load_csv(path)

    def test_non_integer_label_rejected(self, tmp_path):
        path = tmp_path / "l.csv"
        path.write_text("1.0,2.5\n")
        with pytest.raises(DatasetFormatError, match="label"):
            load_csv(path, with_labels=True)

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("\n")
        with pytest.raises(DatasetFormatError, match="empty"):
            load_csv(path)


class TestBinary:
    def test_roundtrip_bit_exact(self, tmp_path, data, labels):
        path = tmp_path / "d.bin"
        save_binary(path, data, labels)
        got, got_labels = load_binary(path)
        assert np.array_equal(got, data)
        assert np.array_equal(got_labels, labels)

    def test_roundtrip_without_labels(self, tmp_path, data):
        path = tmp_path / "d.bin"
        save_binary(path, data)
        assert np.array_equal(load_binary(path), data)

    def test_truncated_payload_names_lengths(self, tmp_path, data):
        path = tmp_path / "d.bin"
        save_binary(path, data)
        blob = path.read_bytes()
        path.write_bytes(blob[:-8])  # drop exactly one value
        with pytest.raises(DatasetFormatError) as err:
            load_binary(path)
        assert str(len(blob)) in str(err.value)
        assert str(len(blob) - 8) in str(err.value)

    def test_bad_magic(self, tmp_path, data):
        path = tmp_path / "d.bin"
        save_binary(path, data)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"BOGU"
        path.write_bytes(bytes(blob))
        with pytest.raises(DatasetFormatError, match="magic"):
            load_binary(path)

    def test_bad_version(self, tmp_path, data):
        path = tmp_path / "d.bin"
        save_binary(path, data)
        blob = bytearray(path.read_bytes())
        blob[4:8] = struct.pack("<I", 9)
        path.write_bytes(bytes(blob))
        with pytest.raises(DatasetFormatError, match="version"):
            load_binary(path)

    def test_nan_payload_rejected_with_offset(self, tmp_path):
        header = struct.pack("<4sIIQQ", b"SCRM", 1, 0, 2, 2)
        values = struct.pack("<4d", 1.0, float("nan"), 3.0, 4.0)
        path = tmp_path / "n.bin"
        path.write_bytes(header + values)
        with pytest.raises(DatasetFormatError, match="offset 36"):
            load_binary(path)

    def test_missing_labels_demanded(self, tmp_path, data):
        path = tmp_path / "d.bin"
        save_binary(path, data)
        with pytest.raises(DatasetFormatError, match="label"):
            load_binary(path, with_labels=True)

    def test_header_truncated(self, tmp_path):
        path = tmp_path / "h.bin"
        path.write_bytes(b"SCRM\x01")
        with pytest.raises(DatasetFormatError, match="header"):
            load_binary(path)


class TestDispatch:
    @pytest.mark.parametrize("fmt", ["csv", "binary"])
    def test_save_load(self, tmp_path, data, labels, fmt):
        path = tmp_path / f"d.{fmt}"
        save_dataset(path, data, labels, fmt=fmt)
        got, got_labels = load_dataset(path, fmt=fmt, with_labels=True)
        assert np.array_equal(got, data)
        assert np.array_equal(got_labels, labels)

    def test_unknown_format(self, tmp_path, data):
        with pytest.raises(ValueError):
            save_dataset(tmp_path / "x", data, fmt="parquet")


class TestResults:
    def test_json_roundtrip_and_stability(self, tmp_path):
        payload = {"b": [1, 2, {"z": np.float64(0.5), "a": np.int64(3)}],
                   "a": np.array([1.0, 2.0]), "flag": np.bool_(True)}
        text = results_to_json(payload)
        assert text == results_to_json(payload)
        assert text.startswith("{")
        path = tmp_path / "r.json"
        save_results(path, payload)
        back = load_results(path)
        assert back["a"] == [1.0, 2.0]
        assert back["flag"] is True

    def test_cells_csv(self, tmp_path):
        results = {"cells": [{"m": 2, "acc": 0.5}, {"m": 3, "acc": None}]}
        path = tmp_path / "cells.csv"
        cells_to_csv(path, results)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "m,acc"
        assert lines[2] == "3,"

    def test_cells_csv_requires_cells(self, tmp_path):
        with pytest.raises(ValueError):
            cells_to_csv(tmp_path / "c.csv", {"cells": []})
