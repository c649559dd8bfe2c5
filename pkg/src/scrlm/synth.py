"""Gaussian mixture with outliers: configs, benchmark schedules, sampling.

A dataset is drawn in four steps from a single seeded SFC64 stream, in this
order: (1) the m cluster centers, i.i.d. standard normal in R^p; (2) one
categorical label per observation with probabilities (outlier_weight, w_1,
..., w_m); (3) one standard normal noise vector per observation; (4) the
affine transform x = mu_l + sigma_l * z for cluster members and x = z for
outliers.  Identical config and seed therefore reproduce the dataset bit for
bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_data_matrix

__all__ = [
    "GmmConfig",
    "LabeledDataset",
    "SampleWorkspace",
    "linear_weight_schedule",
    "linear_sigma_schedule",
    "benchmark_config",
    "sample",
]

_WEIGHT_SUM_TOL = 1e-12


def linear_weight_schedule(m: int, outlier_weight: float = 0.0) -> np.ndarray:
    """Cluster weights linearly spaced from 0.8/m to 1.2/m, scaled to leave
    room for the outlier mass.  For m == 1 the single cluster takes all the
    non-outlier mass."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not (0.0 <= outlier_weight < 1.0):
        raise ValueError(f"outlier_weight must be in [0, 1), got {outlier_weight}")
    if m == 1:
        return np.array([1.0 - outlier_weight])
    return np.linspace(0.8 / m, 1.2 / m, m) * (1.0 - outlier_weight)


def linear_sigma_schedule(m: int) -> np.ndarray:
    """Cluster standard deviations linearly spaced from 1/16 to 1/4.

    For m == 1 the single value is the upper endpoint 1/4, so the maximum
    sigma matches the multi-cluster schedules.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if m == 1:
        return np.array([0.25])
    return np.linspace(0.0625, 0.25, m)


@dataclass(frozen=True)
class GmmConfig:
    """Mixture specification: m isotropic Gaussian clusters plus a standard
    normal outlier component."""

    m: int
    p: int
    n_samples: int
    outlier_weight: float
    cluster_weights: tuple
    cluster_sigmas: tuple
    seed: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if not (0.0 <= self.outlier_weight < 1.0):
            raise ValueError(
                f"outlier_weight must be in [0, 1), got {self.outlier_weight}")
        if len(self.cluster_weights) != self.m or len(self.cluster_sigmas) != self.m:
            raise ValueError("cluster_weights and cluster_sigmas must have length m")
        if any(w < 0 for w in self.cluster_weights):
            raise ValueError("cluster weights must be non-negative")
        total = self.outlier_weight + math.fsum(self.cluster_weights)
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1, got {total!r}")
        if any(not (0.0 < s < 1.0) for s in self.cluster_sigmas):
            raise ValueError("cluster sigmas must lie strictly in (0, 1)")

    @property
    def sigma_max(self) -> float:
        return max(self.cluster_sigmas)


@dataclass(frozen=True)
class LabeledDataset:
    """A sampled dataset with its ground truth."""

    data: np.ndarray          # (n_samples, p)
    true_labels: np.ndarray   # -1 for outliers, 1..m otherwise
    true_centers: np.ndarray  # (m, p)
    config: GmmConfig


class SampleWorkspace:
    """Reusable buffers for repeated sampling.

    Avoids reallocating the two (n_samples, p) arrays on every draw, which
    dominates the cost of large sweeps.  Datasets sampled with a workspace
    alias its buffers and are overwritten by the next sample() call that
    uses the same workspace.
    """

    def __init__(self):
        self._flat_a = np.empty(0)
        self._flat_b = np.empty(0)

    def buffers(self, n: int, p: int) -> tuple[np.ndarray, np.ndarray]:
        need = n * p
        if self._flat_a.size < need:
            self._flat_a = np.empty(need)
            self._flat_b = np.empty(need)
        return (self._flat_a[:need].reshape(n, p),
                self._flat_b[:need].reshape(n, p))


def benchmark_config(m: int, p: int, n_samples: int,
                     outlier_weight: float = 0.0, seed: int = 0) -> GmmConfig:
    """Config with the linear weight and sigma schedules applied."""
    return GmmConfig(
        m=m, p=p, n_samples=n_samples, outlier_weight=outlier_weight,
        cluster_weights=tuple(linear_weight_schedule(m, outlier_weight)),
        cluster_sigmas=tuple(linear_sigma_schedule(m)),
        seed=seed,
    )


def sample(config: GmmConfig, workspace: SampleWorkspace | None = None) -> LabeledDataset:
    """Draw a dataset from the mixture; deterministic for a fixed seed."""
    rng = np.random.Generator(np.random.SFC64(config.seed))
    n, p, m = config.n_samples, config.p, config.m

    centers = rng.standard_normal((m, p))
    probs = np.concatenate(([config.outlier_weight], config.cluster_weights))
    probs = probs / probs.sum()  # remove the <=1e-12 rounding slack
    cat = rng.choice(m + 1, size=n, p=probs)  # 0 = outlier, k = cluster k

    if workspace is None:
        data = rng.standard_normal((n, p))
        means = np.empty((n, p))
    else:
        data, means = workspace.buffers(n, p)
        rng.standard_normal(out=data)

    scale_by_label = np.concatenate(([1.0], config.cluster_sigmas))
    data *= scale_by_label[cat][:, None]
    mean_by_label = np.concatenate((np.zeros((1, p)), centers), axis=0)
    np.take(mean_by_label, cat, axis=0, out=means)
    data += means

    true_labels = np.where(cat == 0, -1, cat).astype(np.int64)
    return LabeledDataset(data=data, true_labels=true_labels,
                          true_centers=centers, config=config)
