"""Command-line interface.

Subcommands: gen (sample a synthetic dataset), fit (cluster a dataset),
eval (score predicted against true labels), bounds (print the guarantee
report), experiment (run a seeded sweep), report (render figures and a
cells.csv from experiment results).

Exit codes: 0 on success, 2 on argument or spec validation failure, 3 on IO
failure.  ``experiment`` accepts a plain key-value config file (``key =
value`` lines, ``#`` comments, grid axes as ``grid.<axis> = v1,v2,...``);
command-line flags override config values.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bounds as bounds_mod
from .cluster import fit
from .core import ScrlmParams, as_label_vector
from .dataio import (DatasetFormatError, load_dataset, load_results,
                     results_to_json, save_dataset, save_results)
from .experiments import ExperimentSpec, run_experiment
from .metrics import accuracy, purity
from .synth import benchmark_config, sample

__all__ = ["main", "build_parser", "parse_config_file"]

_INT_FIELDS = {"m", "p", "n_samples", "subsample_size", "max_clusters",
               "repetitions", "master_seed", "seed"}
_FLOAT_FIELDS = {"rho", "f_const", "outlier_weight", "weight_floor", "delta"}
_INT_AXES = {"m", "p", "n_samples", "subsample_size"}


def parse_config_file(path: str) -> dict:
    """Read ``key = value`` lines; returns raw string values keyed by name."""
    raw = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}: line {lineno}: expected 'key = value'")
            raw[key.strip()] = value.strip()
    return raw


def _coerce_spec_value(key: str, raw: str):
    if key in _INT_FIELDS:
        return int(raw)
    if key in _FLOAT_FIELDS:
        return float(raw)
    return raw


def _spec_from_sources(args) -> ExperimentSpec:
    settings: dict = {}
    grid: dict = {}
    if args.config:
        for key, raw in parse_config_file(args.config).items():
            if key.startswith("grid."):
                axis = key[len("grid."):]
                grid[axis] = raw
            else:
                settings[key] = _coerce_spec_value(key, raw)
    for key in ("kind", "repetitions", "master_seed", "m", "p", "n_samples",
                "outlier_weight", "rho", "f_const", "subsample_size",
                "max_clusters", "weight_floor", "delta"):
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    for item in args.grid or []:
        axis, sep, raw = item.partition("=")
        if not sep:
            raise ValueError(f"--grid expects axis=v1,v2,..., got {item!r}")
        grid[axis.strip()] = raw
    parsed_grid = {}
    for axis, raw in grid.items():
        conv = int if axis in _INT_AXES else float
        parsed_grid[axis] = tuple(conv(v.strip()) for v in raw.split(",") if v.strip())
    if "kind" not in settings:
        raise ValueError("experiment kind is required (flag --kind or config)")
    spec = ExperimentSpec(grid=parsed_grid, **settings)
    spec.validate()
    return spec


def _load_label_file(path: str) -> np.ndarray:
    values = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(int(float(line)))
            except ValueError:
                raise DatasetFormatError(
                    f"{path}: line {lineno}: expected an integer label") from None
    if not values:
        raise DatasetFormatError(f"{path}: no labels found")
    return as_label_vector(np.array(values, dtype=np.int64))


def _save_label_file(path: str, labels) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for v in labels:
            fh.write(f"{int(v)}\n")


def _emit(payload: dict, out_path: str | None) -> None:
    text = results_to_json(payload)
    if out_path:
        with open(out_path, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_gen(args) -> int:
    config = benchmark_config(args.m, args.p, args.n_samples,
                              args.outlier_weight, args.seed)
    ds = sample(config)
    labels = None if args.no_labels else ds.true_labels
    save_dataset(args.out, ds.data, labels, fmt=args.format)
    if args.labels_out:
        _save_label_file(args.labels_out, ds.true_labels)
    return 0


def _cmd_fit(args) -> int:
    loaded = load_dataset(args.data, fmt=args.format, with_labels=args.with_labels)
    data, true_labels = loaded if args.with_labels else (loaded, None)
    params = ScrlmParams(rho=args.rho, subsample_size=args.subsample_size,
                         max_clusters=args.max_clusters, f_const=args.f_const,
                         seed=args.seed)
    result = fit(data, params)
    if args.labels_out:
        _save_label_file(args.labels_out, result.labels)
    summary = {
        "num_clusters": result.num_clusters,
        "stopped_early": result.stopped_early,
        "radius": result.model.radius,
        "outliers_predicted": int(np.sum(result.labels == -1)),
        "n_samples": int(data.shape[0]),
        "p": int(data.shape[1]),
    }
    if true_labels is not None:
        summary["accuracy"] = accuracy(true_labels, result.labels)
        summary["purity"] = purity(true_labels, result.labels)
    _emit(summary, args.json)
    return 0


def _cmd_eval(args) -> int:
    true_labels = _load_label_file(args.true_labels)
    pred_labels = _load_label_file(args.pred_labels)
    payload = {
        "accuracy": accuracy(true_labels, pred_labels),
        "purity": purity(true_labels, pred_labels),
        "n_samples": int(true_labels.shape[0]),
    }
    _emit(payload, args.json)
    return 0


def _cmd_bounds(args) -> int:
    a_eff = args.weight_floor * (1.0 - args.outlier_weight)
    n_sub = args.subsample_size
    if n_sub is None:
        n_sub = bounds_mod.default_subsample_size(args.m, a_eff, args.delta)
    report = bounds_mod.bound_report(args.n_samples, args.p, args.m, n_sub,
                                     a_eff, args.delta)
    payload = report.as_dict()
    if args.rho is not None and args.sigma_max is not None:
        payload["bandwidth_ok"] = bounds_mod.bandwidth_ok(args.sigma_max, args.rho)
        payload["in_guaranteed_region"] = bounds_mod.in_guaranteed_region(
            args.n_samples, args.p, args.m, n_sub, a_eff, args.delta,
            sigma_max=args.sigma_max, rho=args.rho)
    _emit(payload, args.json)
    return 0


def _cmd_experiment(args) -> int:
    spec = _spec_from_sources(args)
    results = run_experiment(spec, jobs=args.jobs)
    if args.out:
        save_results(args.out, results)
    else:
        sys.stdout.write(results_to_json(results))
    return 0


def _cmd_report(args) -> int:
    from .figures import render_report
    results = load_results(args.results)
    written = render_report(results, args.outdir)
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scrlm",
        description="Robust-loss clustering toolkit for Gaussian mixtures "
                    "with outliers")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="sample a synthetic mixture dataset")
    p_gen.add_argument("--m", type=int, required=True, help="number of clusters")
    p_gen.add_argument("--p", type=int, required=True, help="dimension")
    p_gen.add_argument("--n-samples", type=int, required=True, dest="n_samples")
    p_gen.add_argument("--outlier-weight", type=float, default=0.0,
                       dest="outlier_weight")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--format", choices=("csv", "binary"), default="csv")
    p_gen.add_argument("--no-labels", action="store_true",
                       help="omit the label column/block from the dataset file")
    p_gen.add_argument("--labels-out", dest="labels_out",
                       help="also write true labels, one per line")
    p_gen.set_defaults(func=_cmd_gen)

    p_fit = sub.add_parser("fit", help="cluster a dataset file")
    p_fit.add_argument("data", help="dataset path")
    p_fit.add_argument("--format", choices=("csv", "binary"), default="csv")
    p_fit.add_argument("--with-labels", action="store_true", dest="with_labels",
                       help="dataset carries true labels; report accuracy")
    p_fit.add_argument("--rho", type=float, required=True)
    p_fit.add_argument("--subsample-size", type=int, required=True,
                       dest="subsample_size")
    p_fit.add_argument("--max-clusters", type=int, default=None,
                       dest="max_clusters")
    p_fit.add_argument("--f-const", type=float, default=2.5, dest="f_const")
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--labels-out", dest="labels_out",
                       help="write predicted labels, one per line")
    p_fit.add_argument("--json", help="write the summary JSON here instead of stdout")
    p_fit.set_defaults(func=_cmd_fit)

    p_eval = sub.add_parser("eval", help="score predicted labels against truth")
    p_eval.add_argument("--true-labels", required=True, dest="true_labels")
    p_eval.add_argument("--pred-labels", required=True, dest="pred_labels")
    p_eval.add_argument("--json", help="write the metrics JSON here instead of stdout")
    p_eval.set_defaults(func=_cmd_eval)

    p_bounds = sub.add_parser("bounds", help="print the guarantee report")
    p_bounds.add_argument("--n-samples", type=int, required=True, dest="n_samples")
    p_bounds.add_argument("--p", type=int, required=True)
    p_bounds.add_argument("--m", type=int, required=True)
    p_bounds.add_argument("--subsample-size", type=int, default=None,
                          dest="subsample_size")
    p_bounds.add_argument("--weight-floor", type=float, default=0.8,
                          dest="weight_floor")
    p_bounds.add_argument("--outlier-weight", type=float, default=0.0,
                          dest="outlier_weight")
    p_bounds.add_argument("--delta", type=float, default=0.01)
    p_bounds.add_argument("--rho", type=float, default=None)
    p_bounds.add_argument("--sigma-max", type=float, default=None, dest="sigma_max")
    p_bounds.add_argument("--json", help="write the report JSON here instead of stdout")
    p_bounds.set_defaults(func=_cmd_bounds)

    p_exp = sub.add_parser("experiment", help="run a seeded experiment")
    p_exp.add_argument("--kind", choices=("phase_grid", "rho_stability",
                                          "outlier_sweep", "timing_scaling",
                                          "single_run", "bounds_report"),
                       default=None)
    p_exp.add_argument("--config", help="key-value config file")
    p_exp.add_argument("--grid", action="append", metavar="AXIS=V1,V2,...",
                       help="grid axis values (repeatable)")
    p_exp.add_argument("--repetitions", type=int, default=None)
    p_exp.add_argument("--master-seed", type=int, default=None, dest="master_seed")
    p_exp.add_argument("--m", type=int, default=None)
    p_exp.add_argument("--p", type=int, default=None)
    p_exp.add_argument("--n-samples", type=int, default=None, dest="n_samples")
    p_exp.add_argument("--outlier-weight", type=float, default=None,
                       dest="outlier_weight")
    p_exp.add_argument("--rho", type=float, default=None)
    p_exp.add_argument("--f-const", type=float, default=None, dest="f_const")
    p_exp.add_argument("--subsample-size", type=int, default=None,
                       dest="subsample_size")
    p_exp.add_argument("--max-clusters", type=int, default=None,
                       dest="max_clusters")
    p_exp.add_argument("--weight-floor", type=float, default=None,
                       dest="weight_floor")
    p_exp.add_argument("--delta", type=float, default=None)
    p_exp.add_argument("--jobs", type=int, default=1)
    p_exp.add_argument("--out", help="write results JSON here instead of stdout")
    p_exp.set_defaults(func=_cmd_experiment)

    p_rep = sub.add_parser("report", help="render figures from results JSON")
    p_rep.add_argument("results", help="results JSON path")
    p_rep.add_argument("--outdir", default="report")
    p_rep.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, DatasetFormatError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, (DatasetFormatError, OSError, json.JSONDecodeError)):
            return 3
        return 2


if __name__ == "__main__":
    sys.exit(main())
