"""Clustering toolkit for Gaussian mixtures with outliers.

The core algorithm extracts cluster centers one by one as minimizers of a
truncated robust loss over a random subsample, then labels every point by
its nearest center with an outlier cutoff.  The package also ships the
matching synthetic data generator, permutation-matched accuracy and purity
metrics, executable recovery guarantees, k-means baselines, and a seeded
experiment harness with figure rendering.

All randomness flows through numpy's SFC64 bit generator; every stochastic
entry point takes an explicit integer seed and is reproducible bit for bit.
"""

from .bounds import (BoundReport, bandwidth_ok, bound_report,
                     default_subsample_size, in_guaranteed_region,
                     min_dim_for_clusters, min_dim_for_samples, min_samples,
                     min_subsample, success_probability)
from .cluster import (Extraction, ScrlmResult, assign_labels, extract_centers,
                      fit, subsample_indices)
from .core import (ClusterModel, ScrlmParams, as_data_matrix, as_label_vector,
                   pairwise_sq_dists, per_observation_loss, support_radius,
                   total_loss)
from .dataio import (DatasetFormatError, load_dataset, load_results,
                     results_to_json, save_dataset, save_results)
from .experiments import (ExperimentSpec, rep_seeds, run_experiment,
                          scrub_volatile)
from .kmeans import (KmeansParams, KmeansResult, NoClustersError,
                     kmeanspp_init, lloyd, scrlm_kmeans)
from .metrics import (ConfusionMatrix, accuracy, confusion_matrix,
                      hungarian_assign, purity)
from .synth import (GmmConfig, LabeledDataset, SampleWorkspace,
                    benchmark_config, linear_sigma_schedule,
                    linear_weight_schedule, sample)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # core
    "ScrlmParams", "ClusterModel", "as_data_matrix", "as_label_vector",
    "per_observation_loss", "total_loss", "support_radius", "pairwise_sq_dists",
    # cluster
    "ScrlmResult", "Extraction", "fit", "extract_centers", "assign_labels",
    "subsample_indices",
    # synth
    "GmmConfig", "LabeledDataset", "SampleWorkspace", "sample",
    "benchmark_config", "linear_weight_schedule", "linear_sigma_schedule",
    # metrics
    "ConfusionMatrix", "confusion_matrix", "accuracy", "purity",
    "hungarian_assign",
    # bounds
    "BoundReport", "bound_report", "success_probability", "bandwidth_ok",
    "in_guaranteed_region", "min_dim_for_samples", "min_dim_for_clusters",
    "min_subsample", "min_samples", "default_subsample_size",
    # kmeans
    "KmeansParams", "KmeansResult", "NoClustersError", "kmeanspp_init",
    "lloyd", "scrlm_kmeans",
    # io + experiments
    "DatasetFormatError", "save_dataset", "load_dataset", "save_results",
    "load_results", "results_to_json", "ExperimentSpec", "run_experiment",
    "rep_seeds", "scrub_volatile",
]
