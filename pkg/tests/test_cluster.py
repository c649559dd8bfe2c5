import numpy as np
import pytest

from scrlm import (
    ScrlmParams,
    assign_labels,
    extract_centers,
    fit,
    subsample_indices,
    support_radius,
)
from tests._reference import naive_fit

SIX_POINTS = np.array([
    [0.0, 0.0], [0.1, 0.0],
    [10.0, 10.0], [10.1, 10.0],
    [50.0, -50.0], [-50.0, 50.0],
])


class TestSubsample:
    def test_exhaustive_sample_is_everything(self):
        for seed in (0, 1, 99):
            assert subsample_indices(5, 5, seed).tolist() == [0, 1, 2, 3, 4]
        assert subsample_indices(1, 1, 7).tolist() == [0]

    def test_deterministic_and_distinct(self):
        a = subsample_indices(100, 10, seed=42)
        b = subsample_indices(100, 10, seed=42)
        assert np.array_equal(a, b)
        assert len(set(a.tolist())) == 10
        assert np.all((a >= 0) & (a < 100))
        assert not np.array_equal(a, subsample_indices(100, 10, seed=43))

    def test_oversized_request(self):
        with pytest.raises(ValueError):
            subsample_indices(5, 6, seed=0)


class TestSixPointExample:
    # two tight pairs plus two isolated points; rho=1, F=2.5, radius sqrt(5)

    def params(self, **kw):
        defaults = dict(rho=1.0, subsample_size=6, max_clusters=6, seed=0)
        defaults.update(kw)
        return ScrlmParams(**defaults)

    def test_extraction_order_and_losses(self):
        ext = extract_centers(SIX_POINTS, self.params())
        assert ext.center_indices.tolist() == [0, 2]  # ties go to lowest index
        assert ext.subsample_losses[:4] == pytest.approx([-4.995] * 4, rel=1e-12)
        assert ext.subsample_losses[4:] == pytest.approx([-2.5, -2.5], rel=1e-12)
        assert ext.remaining_indices.tolist() == [4, 5]
        assert ext.stopped_early
        assert ext.model.radius == pytest.approx(np.sqrt(5.0), rel=1e-12)

    def test_labels(self):
        res = fit(SIX_POINTS, self.params())
        assert res.labels.tolist() == [1, 1, 2, 2, -1, -1]
        assert res.num_clusters == 2

    def test_exact_tie_with_dyadic_offsets(self):
        # offsets representable in binary make the four-way tie bit-exact
        pts = SIX_POINTS.copy()
        pts[1, 0] = 0.125
        pts[3, 0] = 10.125
        ext = extract_centers(pts, self.params())
        assert ext.subsample_losses[0] == ext.subsample_losses[2]
        assert ext.center_indices.tolist() == [0, 2]

    def test_single_round_cap(self):
        res = fit(SIX_POINTS, self.params(max_clusters=1))
        assert res.num_clusters == 1
        assert res.labels.tolist() == [1, 1, -1, -1, -1, -1]
        assert not res.stopped_early  # the one allowed round was used
        centers, labels, stopped = naive_fit(SIX_POINTS, 1.0, 6, 1, 0)
        assert res.labels.tolist() == labels and stopped == res.stopped_early


class TestDegenerateCases:
    def test_all_points_isolated(self):
        data = np.array([[0.0, 0.0], [100.0, 0.0], [0.0, 100.0]])
        res = fit(data, ScrlmParams(rho=1.0, subsample_size=3, max_clusters=3))
        assert res.num_clusters == 0
        assert res.labels.tolist() == [-1, -1, -1]
        assert res.stopped_early

    def test_identical_points_single_cluster(self):
        data = np.tile([[2.0, -3.0, 1.0]], (5, 1))
        res = fit(data, ScrlmParams(rho=1.0, subsample_size=5))
        assert res.num_clusters == 1
        assert res.labels.tolist() == [1] * 5
        ext = extract_centers(data, ScrlmParams(rho=1.0, subsample_size=5))
        assert ext.remaining_indices.size == 0  # one pass removed everything

    def test_single_point(self):
        res = fit(np.array([[1.0]]), ScrlmParams(rho=1.0, subsample_size=1,
                                                 max_clusters=1))
        assert res.num_clusters == 0
        assert res.labels.tolist() == [-1]
        assert res.stopped_early


class TestAssignLabels:
    def test_point_on_center_gets_its_label(self):
        params = ScrlmParams(rho=1.0, subsample_size=6)
        ext = extract_centers(SIX_POINTS, params)
        labels = assign_labels(np.array([[10.0, 10.0]]), ext.model)
        assert labels.tolist() == [2]

    def test_boundary_distance_is_outlier(self):
        # p=1, rho=1, F=4 -> radius exactly 2; the boundary is excluded
        data = np.array([[0.0], [0.5]])
        params = ScrlmParams(rho=1.0, subsample_size=2, f_const=4.0)
        ext = extract_centers(data, params)
        assert ext.center_indices.tolist() == [0]
        labels = assign_labels(np.array([[2.0], [1.9999999], [-2.0]]), ext.model)
        assert labels.tolist() == [-1, 1, -1]

    def test_zero_centers_all_outliers(self):
        data = np.array([[0.0, 0.0], [100.0, 0.0]])
        ext = extract_centers(data, ScrlmParams(rho=0.1, subsample_size=2))
        assert ext.model.num_clusters == 0
        assert assign_labels(data, ext.model).tolist() == [-1, -1]

    def test_dimension_mismatch(self):
        ext = extract_centers(SIX_POINTS, ScrlmParams(rho=1.0, subsample_size=6))
        with pytest.raises(ValueError):
            assign_labels(np.zeros((2, 3)), ext.model)


def _random_case(rng):
    n = int(rng.integers(1, 13))
    p = int(rng.integers(1, 5))
    style = rng.integers(3)
    if style == 0:
        data = rng.uniform(-5, 5, size=(n, p))
    elif style == 1:
        # clumps at a handful of anchor points plus noise
        anchors = rng.uniform(-20, 20, size=(max(1, n // 3), p))
        data = anchors[rng.integers(anchors.shape[0], size=n)] \
            + rng.normal(scale=0.05, size=(n, p))
    else:
        data = rng.normal(scale=3.0, size=(n, p))
        if n >= 2:  # exact duplicates stress the tie-breaking
            data[rng.integers(n)] = data[rng.integers(n)]
    n_sub = int(rng.integers(1, n + 1))
    rho = float(rng.uniform(0.2, 3.0))
    max_clusters = None if rng.integers(2) else int(rng.integers(1, n + 2))
    seed = int(rng.integers(2 ** 32))
    return data, rho, n_sub, max_clusters, seed


class TestFitInvariants:
    def test_matches_naive_oracle(self):
        rng = np.random.Generator(np.random.SFC64(2024))
        for _ in range(60):
            data, rho, n_sub, T, seed = _random_case(rng)
            params = ScrlmParams(rho=rho, subsample_size=n_sub,
                                 max_clusters=T, seed=seed)
            res = fit(data, params)
            ext = extract_centers(data, params)
            ref_centers, ref_labels, ref_stopped = naive_fit(
                data, rho, n_sub, T, seed)
            assert ext.center_indices.tolist() == ref_centers
            assert res.labels.tolist() == ref_labels
            assert res.stopped_early == ref_stopped

    def test_structural_invariants(self):
        rng = np.random.Generator(np.random.SFC64(77))
        for _ in range(40):
            data, rho, n_sub, T, seed = _random_case(rng)
            params = ScrlmParams(rho=rho, subsample_size=n_sub,
                                 max_clusters=T, seed=seed)
            res = fit(data, params)
            ext = extract_centers(data, params)
            m = res.num_clusters
            assert m <= params.resolve_max_clusters(data.shape[0])
            assert m == res.model.centers.shape[0]
            assert set(np.unique(res.labels)) <= ({-1} | set(range(1, m + 1)))
            assert res.model.radius == support_radius(rho, data.shape[1])
            # discovery-order losses are non-decreasing
            center_losses = [
                ext.subsample_losses[list(ext.subsample_indices).index(c)]
                for c in ext.center_indices]
            assert all(a <= b + 1e-12 for a, b in
                       zip(center_losses, center_losses[1:]))
            if m >= 2:
                d = np.sqrt(((res.model.centers[:, None, :]
                              - res.model.centers[None, :, :]) ** 2).sum(-1))
                off_diag = d[~np.eye(m, dtype=bool)]
                assert np.all(off_diag > res.model.radius)
            # label consistency: assigned center is nearest and inside radius
            for i in range(data.shape[0]):
                if res.labels[i] > 0:
                    dists = np.sqrt(((res.model.centers - data[i]) ** 2).sum(-1))
                    k = res.labels[i] - 1
                    assert dists[k] < res.model.radius
                    assert dists[k] <= dists.min() + 1e-12

    def test_pure_function_of_inputs(self):
        rng = np.random.Generator(np.random.SFC64(3))
        data = rng.normal(size=(30, 3))
        params = ScrlmParams(rho=0.8, subsample_size=12, seed=11)
        a = fit(data, params)
        b = fit(data, params)
        assert np.array_equal(a.labels, b.labels)
        assert np.array_equal(a.model.centers, b.model.centers)
        assert np.array_equal(a.subsample_indices, b.subsample_indices)
