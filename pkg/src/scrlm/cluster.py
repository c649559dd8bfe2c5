"""Cluster extraction by robust loss minimization.

The fit proceeds in three stages: draw a subsample of candidate points,
compute each candidate's total loss against the full dataset once, then
repeatedly take the minimum-loss candidate as a center and drop every
remaining candidate strictly inside the support radius around it.  The loop
stops when the minimum remaining loss has risen to ``-F`` (the value of an
isolated point), when the candidate set is exhausted, or after
``max_clusters`` rounds.  Finally every observation is labeled by its nearest
center, or ``-1`` when that center is at least the support radius away.

Candidate losses are computed once and never refreshed after removals.
Argmin ties are broken by the lowest dataset index, which makes the whole
fit a pure function of (data, params).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ClusterModel,
    ScrlmParams,
    _loss_terms,
    as_data_matrix,
    pairwise_sq_dists,
    support_radius,
)

__all__ = ["ScrlmResult", "Extraction", "subsample_indices", "extract_centers",
           "assign_labels", "fit"]


@dataclass(frozen=True)
class ScrlmResult:
    """Output of a fit: model, per-point labels, and bookkeeping.

    Labels are -1 for outliers and 1..num_clusters otherwise, numbered in
    center discovery order.  stopped_early is True when the extraction loop
    exited before using all of its rounds.
    """

    model: ClusterModel
    labels: np.ndarray
    num_clusters: int
    subsample_indices: np.ndarray
    stopped_early: bool


@dataclass(frozen=True)
class Extraction:
    """Result of the center-extraction loop, before labels are assigned."""

    model: ClusterModel
    center_indices: np.ndarray      # dataset indices of the centers, in order
    subsample_indices: np.ndarray   # the sampled candidate set, sorted
    remaining_indices: np.ndarray   # candidates never removed by any center
    subsample_losses: np.ndarray    # loss of each candidate, aligned with subsample_indices
    stopped_early: bool


def subsample_indices(n_total: int, n_sub: int, seed: int) -> np.ndarray:
    """Draw n_sub distinct indices from range(n_total), sorted ascending.

    Uses a partial Fisher-Yates shuffle driven by a seeded SFC64 stream, so
    the draw is reproducible for a fixed seed.
    """
    if n_sub < 1:
        raise ValueError(f"subsample size must be >= 1, got {n_sub}")
    if n_sub > n_total:
        raise ValueError(
            f"subsample size {n_sub} exceeds population size {n_total}")
    rng = np.random.Generator(np.random.SFC64(seed))
    idx = np.arange(n_total)
    for i in range(n_sub):
        j = i + int(rng.integers(n_total - i))
        idx[i], idx[j] = idx[j], idx[i]
    return np.sort(idx[:n_sub])


def _candidate_losses(data, sub_idx, rho, f_const):
    d_sq = pairwise_sq_dists(data, data[sub_idx])
    return _loss_terms(d_sq, data.shape[1], rho, f_const).sum(axis=0)


def extract_centers(data, params: ScrlmParams, *, validate: bool = True) -> Extraction:
    """Run the subsample draw and the center-extraction loop.

    Returns the discovered centers in order together with the candidate set
    that survived all removals.  Zero centers is a valid outcome: it means no
    candidate had loss below -f_const.
    """
    if validate:
        data = as_data_matrix(data)
    n_total, p = data.shape
    sub = subsample_indices(n_total, params.subsample_size, params.seed)
    losses = _candidate_losses(data, sub, params.rho, params.f_const)
    radius = support_radius(params.rho, p, params.f_const)
    r_sq = radius * radius
    max_rounds = params.resolve_max_clusters(n_total)

    remaining = np.arange(sub.shape[0])
    center_local = []
    stopped_early = True
    for _ in range(max_rounds):
        if remaining.size == 0:
            break
        k = remaining[np.argmin(losses[remaining])]
        if not (losses[k] < -params.f_const):
            break
        center_local.append(k)
        d_sq = pairwise_sq_dists(data[sub[remaining]], data[sub[k]][None, :])[:, 0]
        remaining = remaining[d_sq >= r_sq]
    else:
        stopped_early = False

    center_idx = sub[center_local] if center_local else np.empty(0, dtype=sub.dtype)
    model = ClusterModel(centers=data[center_idx].copy(), radius=radius, dimension=p)
    return Extraction(
        model=model,
        center_indices=center_idx,
        subsample_indices=sub,
        remaining_indices=sub[remaining],
        subsample_losses=losses,
        stopped_early=stopped_early,
    )


def assign_labels(data, model: ClusterModel, *, validate: bool = True) -> np.ndarray:
    """Label every observation by its nearest center.

    A point gets label k (1-based, discovery order) when its nearest center
    is center k at distance strictly less than the support radius, and -1
    otherwise.  With zero centers every label is -1.  Nearest-center ties go
    to the lowest center index.
    """
    if validate:
        data = as_data_matrix(data)
    n_total = data.shape[0]
    if model.num_clusters == 0:
        return np.full(n_total, -1, dtype=np.int64)
    if model.centers.shape[1] != data.shape[1]:
        raise ValueError(
            f"model dimension {model.centers.shape[1]} does not match data "
            f"dimension {data.shape[1]}")
    d_sq = pairwise_sq_dists(data, model.centers)
    nearest = np.argmin(d_sq, axis=1)
    best = d_sq[np.arange(n_total), nearest]
    r_sq = model.radius * model.radius
    return np.where(best < r_sq, nearest + 1, -1).astype(np.int64)


def fit(data, params: ScrlmParams, *, validate: bool = True) -> ScrlmResult:
    """Subsample, extract centers, and label the dataset.

    Deterministic for a fixed (data, params) pair.  Set validate=False to
    skip the finiteness scan of the input when the caller already guarantees
    it (the experiment harness does this on freshly generated data).
    """
    data = as_data_matrix(data) if validate else np.asarray(data, dtype=np.float64)
    extraction = extract_centers(data, params, validate=False)
    labels = assign_labels(data, extraction.model, validate=False)
    return ScrlmResult(
        model=extraction.model,
        labels=labels,
        num_clusters=extraction.model.num_clusters,
        subsample_indices=extraction.subsample_indices,
        stopped_early=extraction.stopped_early,
    )
