"""Dataset file formats and structured result output.

Two dataset formats are supported:

* csv: one observation per row, values printed with repr precision so a
  save/load round trip is bit-exact; an optional final integer column holds
  labels.
* binary: magic ``SCRM``, format version u32, flags u32 (bit 0 = labels
  present), then N u64 and p u64, followed by N*p little-endian float64
  values row-major and, when flagged, N little-endian int32 labels.

Experiment results are serialized as JSON with sorted keys so that a rerun
with the same master seed is byte-identical once volatile (timing) fields
are removed.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .core import as_data_matrix, as_label_vector

__all__ = [
    "DatasetFormatError",
    "save_csv", "load_csv",
    "save_binary", "load_binary",
    "save_dataset", "load_dataset",
    "results_to_json", "save_results", "load_results",
    "cells_to_csv",
]

BINARY_MAGIC = b"SCRM"
BINARY_VERSION = 1
_FLAG_LABELS = 1
_HEADER = struct.Struct("<4sIIQQ")


class DatasetFormatError(Exception):
    """A dataset file could not be parsed; the message carries offsets."""


def save_csv(path, data, labels=None) -> None:
    data = as_data_matrix(data)
    if labels is not None:
        labels = as_label_vector(labels, data.shape[0])
    with open(path, "w", encoding="ascii") as fh:
        for i in range(data.shape[0]):
            row = ",".join(repr(v) for v in data[i].tolist())
            if labels is not None:
                row += f",{labels[i]}"
            fh.write(row + "\n")


def load_csv(path, with_labels: bool = False):
    """Returns data or (data, labels) depending on with_labels."""
    rows = []
    labels = []
    width = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
                if with_labels and width < 2:
                    raise DatasetFormatError(
                        f"{path}: line {lineno}: need at least 2 columns "
                        f"when a label column is expected, got {width}")
            elif len(fields) != width:
                raise DatasetFormatError(
                    f"{path}: line {lineno}: expected {width} columns, "
                    f"got {len(fields)}")
            try:
                values = [float(v) for v in fields]
            except ValueError as exc:
                raise DatasetFormatError(
                    f"{path}: line {lineno}: {exc}") from None
            if with_labels:
                lab = values[-1]
                if lab != int(lab):
                    raise DatasetFormatError(
                        f"{path}: line {lineno}: label column must be an "
                        f"integer, got {fields[-1]}")
                labels.append(int(lab))
                values = values[:-1]
            rows.append(values)
    if not rows:
        raise DatasetFormatError(f"{path}: empty dataset")
    data = np.array(rows, dtype=np.float64)
    if not np.isfinite(data).all():
        bad = np.argwhere(~np.isfinite(data))[0]
        raise DatasetFormatError(
            f"{path}: non-finite value at row {bad[0] + 1}, column {bad[1] + 1}")
    if with_labels:
        return data, as_label_vector(np.array(labels, dtype=np.int64))
    return data


def save_binary(path, data, labels=None) -> None:
    data = as_data_matrix(data)
    flags = 0
    if labels is not None:
        labels = as_label_vector(labels, data.shape[0])
        flags |= _FLAG_LABELS
    header = _HEADER.pack(BINARY_MAGIC, BINARY_VERSION, flags,
                          data.shape[0], data.shape[1])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(data, dtype="<f8").tobytes())
        if labels is not None:
            fh.write(np.ascontiguousarray(labels, dtype="<i4").tobytes())


def load_binary(path, with_labels: bool | None = None):
    """Load a binary dataset.

    with_labels=None returns labels iff the file carries them; True demands
    them; False ignores them.  Returns data or (data, labels).
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise DatasetFormatError(
            f"{path}: header truncated: need {_HEADER.size} bytes, "
            f"got {len(blob)}")
    magic, version, flags, n, p = _HEADER.unpack_from(blob, 0)
    if magic != BINARY_MAGIC:
        raise DatasetFormatError(
            f"{path}: bad magic {magic!r} at offset 0, expected {BINARY_MAGIC!r}")
    if version != BINARY_VERSION:
        raise DatasetFormatError(
            f"{path}: unsupported format version {version} at offset 4")
    if flags & ~_FLAG_LABELS:
        raise DatasetFormatError(
            f"{path}: unknown flag bits {flags:#x} at offset 8")
    if n < 1 or p < 1:
        raise DatasetFormatError(f"{path}: invalid shape ({n}, {p}) in header")
    has_labels = bool(flags & _FLAG_LABELS)
    expect = _HEADER.size + n * p * 8 + (n * 4 if has_labels else 0)
    if len(blob) != expect:
        raise DatasetFormatError(
            f"{path}: payload length mismatch: expected {expect} bytes "
            f"({n}x{p} float64{' + labels' if has_labels else ''}), "
            f"got {len(blob)}")
    if with_labels is True and not has_labels:
        raise DatasetFormatError(f"{path}: file carries no label block")
    data = np.frombuffer(blob, dtype="<f8", count=n * p,
                         offset=_HEADER.size).reshape(n, p).copy()
    if not np.isfinite(data).all():
        flat = int(np.argwhere(~np.isfinite(data.ravel()))[0][0])
        raise DatasetFormatError(
            f"{path}: non-finite value at byte offset {_HEADER.size + flat * 8}")
    if has_labels and with_labels is not False:
        labels = np.frombuffer(blob, dtype="<i4", count=n,
                               offset=_HEADER.size + n * p * 8)
        return data, as_label_vector(labels.astype(np.int64))
    return data


def save_dataset(path, data, labels=None, fmt: str = "csv") -> None:
    if fmt == "csv":
        save_csv(path, data, labels)
    elif fmt == "binary":
        save_binary(path, data, labels)
    else:
        raise ValueError(f"unknown dataset format {fmt!r}")


def load_dataset(path, fmt: str = "csv", with_labels: bool = False):
    if fmt == "csv":
        return load_csv(path, with_labels)
    if fmt == "binary":
        return load_binary(path, bool(with_labels))
    raise ValueError(f"unknown dataset format {fmt!r}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def results_to_json(results: dict) -> str:
    """Canonical JSON: sorted keys, stable float repr, trailing newline."""
    return json.dumps(_jsonable(results), sort_keys=True, indent=2) + "\n"


def save_results(path, results: dict) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(results_to_json(results))


def load_results(path) -> dict:
    with open(path, "r", encoding="ascii") as fh:
        return json.load(fh)


def cells_to_csv(path, results: dict) -> None:
    """Flat delimited view of per-cell results (one row per grid cell)."""
    cells = results.get("cells", [])
    if not cells:
        raise ValueError("results carry no cells to export")
    keys = []
    for cell in cells:
        for key in cell:
            if key not in keys:
                keys.append(key)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(keys) + "\n")
        for cell in cells:
            fields = []
            for key in keys:
                v = cell.get(key, "")
                fields.append("" if v is None else str(v))
            fh.write(",".join(fields) + "\n")
