"""Label-matching evaluation: permutation-matched accuracy and purity.

Accuracy matches predicted positive clusters onto true positive clusters by
a maximum-weight assignment on the confusion matrix; the outlier label -1 is
fixed and never permuted, so a predicted -1 scores only against a true -1.
Purity credits every predicted cluster (the -1 group included) with its
largest overlap against any true class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import as_label_vector

__all__ = ["ConfusionMatrix", "confusion_matrix", "hungarian_assign",
           "accuracy", "purity"]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts indexed by (predicted label, true label).

    Row 0 and column 0 hold the outlier label -1; the remaining rows and
    columns follow pred_labels and true_labels (the sorted positive label
    values present in either input).  Entries sum to the number of points.
    """

    counts: np.ndarray
    pred_labels: np.ndarray
    true_labels: np.ndarray


def _checked_pair(true_labels, pred_labels):
    t = as_label_vector(true_labels)
    q = as_label_vector(pred_labels)
    if t.shape[0] != q.shape[0]:
        raise ValueError(
            f"label vectors differ in length: {t.shape[0]} vs {q.shape[0]}")
    return t, q


def confusion_matrix(true_labels, pred_labels) -> ConfusionMatrix:
    t, q = _checked_pair(true_labels, pred_labels)
    tvals = np.unique(t[t > 0])
    qvals = np.unique(q[q > 0])
    trow = np.searchsorted(tvals, t) + 1
    trow[t == -1] = 0
    qrow = np.searchsorted(qvals, q) + 1
    qrow[q == -1] = 0
    n_rows = qvals.size + 1
    n_cols = tvals.size + 1
    flat = np.bincount(qrow * n_cols + trow, minlength=n_rows * n_cols)
    counts = flat.reshape(n_rows, n_cols)
    return ConfusionMatrix(counts=counts, pred_labels=qvals, true_labels=tvals)


def hungarian_assign(cost, maximize: bool = False) -> tuple[np.ndarray, float]:
    """Optimal one-to-one assignment of rows to columns.

    Rectangular inputs are padded to square with zero-weight entries, so
    unmatched rows or columns contribute nothing.  Returns (perm, value)
    where perm[i] is the column assigned to row i of the input (-1 when row
    i is matched to a padding column) and value is the total weight over
    real entries.
    """
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
        raise ValueError(f"cost must be a non-empty 2-D matrix, got shape {c.shape}")
    if not np.isfinite(c).all():
        raise ValueError("cost matrix contains non-finite entries")
    n_rows, n_cols = c.shape
    k = max(n_rows, n_cols)
    padded = np.zeros((k, k))
    padded[:n_rows, :n_cols] = c
    rows, cols = linear_sum_assignment(padded, maximize=maximize)
    perm = np.full(n_rows, -1, dtype=np.int64)
    value = 0.0
    for r, col in zip(rows, cols):
        if r < n_rows and col < n_cols:
            perm[r] = col
            value += c[r, col]
    return perm, float(value)


def accuracy(true_labels, pred_labels) -> float:
    """Fraction of points whose label matches the truth under the best
    permutation of positive predicted labels; -1 is matched only to -1."""
    cm = confusion_matrix(true_labels, pred_labels)
    n = int(cm.counts.sum())
    matched = int(cm.counts[0, 0])  # predicted -1 against true -1
    positive = cm.counts[1:, 1:]
    if positive.size:
        _, value = hungarian_assign(positive, maximize=True)
        matched += int(round(value))
    return matched / n


def purity(true_labels, pred_labels) -> float:
    """Mean over predicted clusters of the largest overlap with one true
    class, the -1 group counting as an ordinary cluster on both sides."""
    cm = confusion_matrix(true_labels, pred_labels)
    n = int(cm.counts.sum())
    return int(cm.counts.max(axis=1).sum()) / n
