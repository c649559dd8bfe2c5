"""Lloyd's k-means with pluggable seeding, for the comparison experiments.

Two initializations are provided: classic D^2 seeding (first center uniform,
each later center drawn with probability proportional to the squared
distance to its nearest chosen center) and seeding from the centers found by
the robust-loss extraction.  Lloyd assigns every point, so these baselines
produce no outlier label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cluster import ScrlmResult, fit
from .core import ScrlmParams, as_data_matrix, pairwise_sq_dists


__all__ = ["KmeansParams", "KmeansResult", "NoClustersError",
           "kmeanspp_init", "lloyd", "scrlm_kmeans"]


class NoClustersError(RuntimeError):
    """Raised when the extraction finds no centers to seed k-means with."""


@dataclass(frozen=True)
class KmeansParams:
    k: int
    max_iters: int = 100
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not (math.isfinite(self.tol) and self.tol >= 0):
            raise ValueError(f"tol must be finite and >= 0, got {self.tol}")


@dataclass(frozen=True)
class KmeansResult:
    """Labels are 1..k; inertia is the sum of squared distances of points to
    their assigned centers.  inertia_path records the assignment-time inertia
    of every iteration and is non-increasing."""

    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    n_iters: int
    inertia_path: tuple


def kmeanspp_init(data, k: int, seed: int) -> np.ndarray:
    """D^2 seeding over distinct data indices; deterministic per seed."""
    data = as_data_matrix(data)
    n = data.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points {n}")
    rng = np.random.Generator(np.random.SFC64(seed))
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = int(rng.integers(n))
    d_best = pairwise_sq_dists(data, data[chosen[0]][None, :])[:, 0]
    for t in range(1, k):
        d_best[chosen[:t]] = 0.0  # never reselect a chosen index
        total = d_best.sum()
        if total > 0:
            u = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(d_best), u, side="right"))
            idx = min(idx, n - 1)
        else:
            # all remaining mass is zero (duplicate-heavy data): uniform
            # among the unchosen indices
            unchosen = np.setdiff1d(np.arange(n), chosen[:t])
            idx = int(unchosen[rng.integers(unchosen.size)])
        chosen[t] = idx
        d_new = pairwise_sq_dists(data, data[idx][None, :])[:, 0]
        np.minimum(d_best, d_new, out=d_best)
    return data[chosen].copy()


def _assign(data, centers):
    d_sq = pairwise_sq_dists(data, centers)
    nearest = np.argmin(d_sq, axis=1)
    best = d_sq[np.arange(data.shape[0]), nearest]
    return nearest, best


def lloyd(data, init_centers, params: KmeansParams) -> KmeansResult:
    """Alternate nearest-center assignment and mean updates.

    Stops when the largest center shift is at most params.tol or after
    params.max_iters iterations.  Assignment ties go to the lowest center
    index.  A cluster left empty is reseeded at the point farthest from its
    assigned center.  Inertia is non-increasing across iterations.
    """
    data = as_data_matrix(data)
    centers = np.array(init_centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[0] < 1 or centers.shape[1] != data.shape[1]:
        raise ValueError(
            f"init_centers shape {centers.shape} does not match data "
            f"dimension {data.shape[1]}")
    k = centers.shape[0]
    n = data.shape[0]
    onehot = np.zeros((n, k))
    n_iters = 0
    inertia_path = []
    for _ in range(params.max_iters):
        n_iters += 1
        nearest, best = _assign(data, centers)
        inertia_path.append(float(best.sum()))
        if len(inertia_path) >= 2 and \
                inertia_path[-1] > inertia_path[-2] * (1 + 1e-12) + 1e-12:
            raise AssertionError(
                f"inertia increased: {inertia_path[-2]} -> {inertia_path[-1]}")
        new_centers = np.empty_like(centers)
        counts = np.bincount(nearest, minlength=k)
        onehot[:] = 0.0
        onehot[np.arange(n), nearest] = 1.0
        sums = onehot.T @ data
        empty = np.flatnonzero(counts == 0)
        filled = counts > 0
        new_centers[filled] = sums[filled] / counts[filled, None]
        if empty.size:
            spare = best.copy()
            for c in empty:
                far = int(np.argmax(spare))
                new_centers[c] = data[far]
                spare[far] = -np.inf
        shift = np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max()
        centers = new_centers
        if shift <= params.tol:
            break
    nearest, best = _assign(data, centers)
    return KmeansResult(labels=(nearest + 1).astype(np.int64), centers=centers,
                        inertia=float(best.sum()), n_iters=n_iters,
                        inertia_path=tuple(inertia_path))


def scrlm_kmeans(data, scrlm_params: ScrlmParams, max_iters: int = 100,
                 tol: float = 1e-6) -> tuple[KmeansResult, ScrlmResult]:
    """Lloyd's algorithm seeded with the robust-loss extraction's centers.

    k is the discovered cluster count; every point ends up assigned (no
    outlier label).  Raises NoClustersError when the extraction finds no
    centers.
    """
    data = as_data_matrix(data)
    extraction = fit(data, scrlm_params, validate=False)
    if extraction.num_clusters == 0:
        raise NoClustersError("extraction found no centers to seed k-means")
    params = KmeansParams(k=extraction.num_clusters, max_iters=max_iters,
                          tol=tol, seed=scrlm_params.seed)
    return lloyd(data, extraction.model.centers, params), extraction
