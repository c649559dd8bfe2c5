"""Render experiment results to figure files.

Takes the structured results emitted by the experiment engine and writes one
PNG per figure plus a flat cells.csv next to them.  Grid experiments with
two axes become success-rate heat maps with the theoretically guaranteed
region outlined; one-axis sweeps become line plots; three-axis grids get one
heat map panel per value of the leading axis.  Timing results become log-log
plots with the fitted slopes in the legend.
"""

from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .dataio import cells_to_csv

__all__ = ["render_report"]


def _axis_ticks(ax, names, values, log_hint=True):
    xs = values[names[-1]]
    ax.set_xticks(range(len(xs)))
    ax.set_xticklabels([str(v) for v in xs], rotation=45, ha="right")
    if len(names) >= 2:
        ys = values[names[-2]]
        ax.set_yticks(range(len(ys)))
        ax.set_yticklabels([str(v) for v in ys])


def _heatmap(ax, rate, theo, names, values, title):
    rate = np.asarray(rate, dtype=float)
    im = ax.imshow(rate, origin="lower", vmin=0.0, vmax=1.0, cmap="Greys_r",
                   aspect="auto")
    theo = np.asarray(theo, dtype=float)
    if np.isfinite(theo).any() and np.nanmax(theo) > 0:
        ax.contour(np.nan_to_num(theo), levels=[0.5], colors="tab:red",
                   linewidths=1.5)
    _axis_ticks(ax, names, values)
    ax.set_xlabel(names[-1])
    ax.set_ylabel(names[-2])
    ax.set_title(title)
    return im


def _plot_grid(results, outdir) -> list[str]:
    fig_data = results["figure_data"]
    names = fig_data["axis_names"]
    values = fig_data["axis_values"]
    rate = np.asarray(fig_data["success_rate"], dtype=float)
    theo = np.asarray(fig_data["theoretical"], dtype=float)
    written = []

    if len(names) == 1:
        xs = values[names[0]]
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(xs, rate, "o-", color="black", label="perfect-run rate")
        flagged = np.nan_to_num(theo) > 0
        if flagged.any():
            ax.fill_between(xs, 0, 1, where=flagged, alpha=0.15,
                            color="tab:red", label="theoretical region")
        if results["kind"] == "outlier_sweep":
            ax.plot(xs, fig_data["kmeans_pp_mean_accuracy"], "s--",
                    color="tab:blue", label="k-means++ mean accuracy")
            sk = [np.nan if v is None else v
                  for v in fig_data["scrlm_kmeans_mean_accuracy"]]
            ax.plot(xs, sk, "d--", color="tab:green",
                    label="extraction + k-means mean accuracy")
        ax.set_xlabel(names[0])
        ax.set_ylabel("rate")
        ax.set_ylim(-0.05, 1.05)
        ax.legend(loc="lower left", fontsize=8)
        ax.set_title(results["kind"])
        path = os.path.join(outdir, f"{results['kind']}.png")
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    elif len(names) == 2:
        fig, ax = plt.subplots(figsize=(6, 5))
        im = _heatmap(ax, rate, theo, names, values, results["kind"])
        fig.colorbar(im, ax=ax, label="perfect-run rate")
        path = os.path.join(outdir, f"{results['kind']}.png")
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    else:
        lead = names[0]
        for i, lead_value in enumerate(values[lead]):
            fig, ax = plt.subplots(figsize=(6, 5))
            im = _heatmap(ax, rate[i], theo[i], names[1:], values,
                          f"{results['kind']} ({lead}={lead_value})")
            fig.colorbar(im, ax=ax, label="perfect-run rate")
            path = os.path.join(outdir, f"{results['kind']}_{lead}_{lead_value}.png")
            fig.tight_layout()
            fig.savefig(path, dpi=150)
            plt.close(fig)
            written.append(path)
    return written


def _plot_timing(results, outdir) -> list[str]:
    sweeps = results["figure_data"]["sweeps"]
    fig, axes = plt.subplots(1, len(sweeps), figsize=(4.5 * len(sweeps), 4))
    if len(sweeps) == 1:
        axes = [axes]
    for ax, (name, sweep) in zip(np.ravel(axes), sweeps.items()):
        sizes = np.asarray(sweep["sizes"], dtype=float)
        times = np.asarray(sweep["wall_seconds"], dtype=float)
        ax.loglog(sizes, times, "o-", color="black",
                  label=f"slope {sweep['slope']:.3f}")
        ref = times[0] * sizes / sizes[0]
        ax.loglog(sizes, ref, ":", color="tab:gray", label="slope 1.0")
        ax.set_xlabel(name)
        ax.set_ylabel("fit wall seconds")
        ax.legend(fontsize=8)
    path = os.path.join(outdir, "timing_scaling.png")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def render_report(results: dict, outdir: str) -> list[str]:
    """Write figures and cells.csv for a results payload; returns paths."""
    os.makedirs(outdir, exist_ok=True)
    written = []
    kind = results.get("kind")
    if kind in ("phase_grid", "rho_stability", "outlier_sweep"):
        written += _plot_grid(results, outdir)
    elif kind == "timing_scaling":
        written += _plot_timing(results, outdir)
    if results.get("cells"):
        csv_path = os.path.join(outdir, "cells.csv")
        cells_to_csv(csv_path, results)
        written.append(csv_path)
    return written
