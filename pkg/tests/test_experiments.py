import numpy as np
import pytest

from scrlm import ExperimentSpec, rep_seeds, run_experiment, scrub_volatile
from scrlm.dataio import results_to_json
from scrlm.experiments import (run_bounds_report, run_outlier_sweep,
                               run_phase_grid, run_rho_stability, run_single,
                               run_timing_scaling)


def small_grid_spec(**kw):
    defaults = dict(kind="phase_grid", grid={"p": (32, 64), "n_samples": (64, 128)},
                    repetitions=5, m=2, rho=0.5, master_seed=7)
    defaults.update(kw)
    return ExperimentSpec(**defaults)


class TestSeeds:
    def test_deterministic_and_distinct(self):
        a = rep_seeds(1, 0, 0)
        assert a == rep_seeds(1, 0, 0)
        seen = {a}
        for cell in range(4):
            for rep in range(4):
                seen.add(rep_seeds(1, cell, rep))
        assert len(seen) == 16  # (0, 0) collides with the first entry only
        assert rep_seeds(2, 0, 0) != a


class TestSpecValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            ExperimentSpec(kind="mystery", grid={"p": (8,)}).validate()

    def test_unknown_axis(self):
        with pytest.raises(ValueError):
            small_grid_spec(grid={"q": (1, 2)}).validate()

    def test_grid_required_for_grid_kinds(self):
        with pytest.raises(ValueError):
            ExperimentSpec(kind="phase_grid").validate()

    def test_bad_repetitions(self):
        with pytest.raises(ValueError):
            small_grid_spec(repetitions=0).validate()


class TestPhaseGrid:
    def test_degenerate_single_cluster_cell(self):
        spec = ExperimentSpec(kind="phase_grid", grid={"m": (1,)},
                              repetitions=20, p=512, n_samples=50, rho=0.5,
                              master_seed=3)
        results = run_phase_grid(spec)
        (cell,) = results["cells"]
        assert cell["success_count"] == 20
        assert cell["experimental_success"] is True
        assert cell["subsample_size"] >= 1

    def test_assumption_violating_cell_still_runs(self):
        spec = ExperimentSpec(kind="phase_grid", grid={"rho": (0.2, 0.5)},
                              repetitions=3, m=2, p=256, n_samples=200,
                              master_seed=5)
        results = run_phase_grid(spec)
        flags = [c["theoretical_region_flag"] for c in results["cells"]]
        assert flags == [False, False]  # p far below both dim thresholds
        assert all(c["success_count"] is not None for c in results["cells"])

    def test_infeasible_cell_skipped(self):
        spec = ExperimentSpec(kind="phase_grid", grid={"n_samples": (8, 200)},
                              repetitions=2, m=3, p=64, subsample_size=27,
                              master_seed=1)
        results = run_phase_grid(spec)
        first, second = results["cells"]
        assert first["skipped"] is True and first["success_count"] is None
        assert second["skipped"] is False

    def test_figure_data_shape(self):
        results = run_phase_grid(small_grid_spec())
        fig = results["figure_data"]
        assert fig["axis_names"] == ["n_samples", "p"]
        rate = np.asarray(fig["success_rate"])
        assert rate.shape == (2, 2)
        assert np.all((rate >= 0) & (rate <= 1))


class TestDeterminism:
    def test_rerun_is_byte_identical(self):
        a = run_phase_grid(small_grid_spec())
        b = run_phase_grid(small_grid_spec())
        assert results_to_json(scrub_volatile(a)) == results_to_json(scrub_volatile(b))
        assert results_to_json(a) != "" and "wall_seconds_total" in a

    def test_jobs_do_not_change_results(self):
        a = run_phase_grid(small_grid_spec(), jobs=1)
        b = run_phase_grid(small_grid_spec(), jobs=2)
        assert results_to_json(scrub_volatile(a)) == results_to_json(scrub_volatile(b))

    def test_master_seed_changes_results(self):
        a = run_phase_grid(small_grid_spec())
        b = run_phase_grid(small_grid_spec(master_seed=8))
        assert results_to_json(scrub_volatile(a)) != results_to_json(scrub_volatile(b))


class TestRhoStability:
    def test_flags_follow_bandwidth_condition(self):
        spec = ExperimentSpec(kind="rho_stability",
                              grid={"rho": (0.2, 0.25, 0.5, 0.7745966692414834, 0.8)},
                              repetitions=2, m=2, p=128, n_samples=200,
                              master_seed=11)
        results = run_rho_stability(spec)
        flags = [c["theoretical_region_flag"] for c in results["cells"]]
        assert flags == [False, True, True, False, False]

    def test_requires_rho_axis(self):
        with pytest.raises(ValueError):
            run_rho_stability(ExperimentSpec(kind="rho_stability",
                                             grid={"p": (8,)}))


class TestOutlierSweep:
    def test_baseline_curves_present(self):
        spec = ExperimentSpec(kind="outlier_sweep", grid={"m": (2,)},
                              repetitions=3, p=128, n_samples=300,
                              outlier_weight=0.5, master_seed=13)
        results = run_outlier_sweep(spec)
        (cell,) = results["cells"]
        assert 0.0 <= cell["kmeans_pp_mean_accuracy"] <= 1.0
        assert cell["scrlm_kmeans_mean_accuracy"] is not None
        assert cell["scrlm_kmeans_failures"] == 0
        # effective weight floor halves with 50% outliers: larger subsample
        assert cell["subsample_size"] > 17


class TestTimingScaling:
    def test_smoke_with_tiny_sizes(self):
        spec = ExperimentSpec(kind="timing_scaling",
                              grid={"n_samples": (256, 512, 1024)},
                              m=2, p=32, n_samples=256, master_seed=17)
        results = run_timing_scaling(spec)
        sweep = results["figure_data"]["sweeps"]["n_samples"]
        assert len(sweep["wall_seconds"]) == 3
        assert all(t > 0 for t in sweep["wall_seconds"])
        assert np.isfinite(sweep["slope"])
        assert "slopes" in results
        scrubbed = scrub_volatile(results)
        assert "slopes" not in scrubbed
        assert "wall_seconds" not in scrubbed["figure_data"]["sweeps"]["n_samples"]


class TestSingleAndBounds:
    def test_single_run_summary(self):
        spec = ExperimentSpec(kind="single_run", m=2, p=128, n_samples=300,
                              rho=0.5, master_seed=19)
        results = run_single(spec)
        (cell,) = results["cells"]
        assert cell["num_clusters"] == 2
        assert cell["accuracy"] == 1.0

    def test_bounds_report_payload(self):
        spec = ExperimentSpec(kind="bounds_report", m=3, p=3700,
                              n_samples=20000, rho=0.5, master_seed=0)
        results = run_bounds_report(spec)
        (cell,) = results["cells"]
        assert cell["p_min_vs_N"] == 3598
        assert cell["n_min"] == 27
        assert cell["bandwidth_ok"] is True
        assert cell["in_guaranteed_region"] is True

    def test_dispatch(self):
        spec = ExperimentSpec(kind="bounds_report", m=2, p=64, n_samples=100)
        assert run_experiment(spec)["kind"] == "bounds_report"
