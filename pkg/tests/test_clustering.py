import numpy as np
import pytest

from distsel.clustering import (LINKAGES, MONOTONE_LINKAGES, Agglomerative,
                                KMeansLloyd, accuracy, cut, evaluate_partition,
                                evaluate_summary, hcluster, inter_distances,
                                intra_distances, kmeans, robust_sd)
from distsel.datasets import generate_two_gaussians
from distsel.distances import DistanceMatrix, compute_distance_matrix, extract_distance_feature
from distsel.validation import InputError

from oracles import accuracy_oracle, agglomerate_oracle


def euclid(points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    return d


class TestAgglomerative:
    def test_single_linkage_line(self):
        dend = hcluster(euclid([0.0, 1.0, 10.0]), "single")
        labels = cut(dend, 2)
        assert labels[0] == labels[1] != labels[2]

    @pytest.mark.parametrize("linkage", LINKAGES)
    def test_matches_rescan_oracle(self, linkage):
        rng = np.random.default_rng(201)
        for _ in range(20):
            n = int(rng.integers(4, 13))
            d = euclid(rng.normal(size=(n, 3)))
            dend = hcluster(d, linkage)
            for step, (left, right, height, size) in enumerate(agglomerate_oracle(d, linkage)):
                assert {int(dend.left[step]), int(dend.right[step])} == {left, right}
                assert dend.heights[step] == pytest.approx(height, abs=1e-9)
                assert dend.sizes[step] == size

    @pytest.mark.parametrize("linkage", sorted(MONOTONE_LINKAGES))
    def test_monotone_heights(self, linkage):
        rng = np.random.default_rng(202)
        for _ in range(10):
            d = euclid(rng.normal(size=(15, 2)))
            dend = hcluster(d, linkage)
            assert dend.inversions == 0

    def test_centroid_inversion_flagged_not_rejected(self):
        # near-equilateral triangle: the merged centroid sits closer to the
        # third point than the first merge height
        d = euclid([[0.0, 0.0], [1.0, 0.0], [0.5, 0.9]])
        dend = hcluster(d, "centroid")
        assert dend.inversions == 1

    def test_cut_extremes(self):
        d = euclid([0.0, 1.0, 3.0, 10.0])
        dend = hcluster(d, "average")
        assert np.array_equal(cut(dend, 1), [1, 1, 1, 1])
        assert sorted(cut(dend, 4)) == [1, 2, 3, 4]
        with pytest.raises(InputError):
            cut(dend, 5)

    def test_labels_are_first_occurrence_ordered(self):
        d = euclid([0.0, 10.0, 0.1, 10.1])
        labels = cut(hcluster(d, "single"), 2)
        assert labels.tolist() == [1, 2, 1, 2]

    def test_tie_break_lowest_pair(self):
        # three equidistant points: (0, 1) must merge first
        d = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
        dend = hcluster(d, "single")
        assert (int(dend.left[0]), int(dend.right[0])) == (0, 1)

    def test_unknown_linkage(self):
        with pytest.raises(InputError):
            hcluster(euclid([0.0, 1.0]), "median2")

    def test_estimator_api(self):
        est = Agglomerative(linkage="ward")
        assert est.get_params()["linkage"] == "ward"
        labels = est.fit_predict(euclid([0.0, 0.1, 5.0, 5.1]), 2)
        assert labels[0] == labels[1] != labels[2]


class TestKMeans:
    def test_two_far_blobs(self):
        rng = np.random.default_rng(203)
        x = np.vstack([rng.normal(0, 0.1, (30, 2)), rng.normal(10, 0.1, (30, 2))])
        labels = kmeans(x, 2, seed=1)
        assert accuracy(labels, np.repeat([1, 2], 30)) == 1.0

    def test_k_one_centroid_is_mean(self):
        x = np.random.default_rng(204).normal(size=(40, 3))
        est = KMeansLloyd(n_clusters=1, seed=0).fit(x)
        assert np.allclose(est.cluster_centers_[0], x.mean(axis=0))
        assert np.all(est.labels_ == 1)

    def test_beats_random_assignments(self):
        rng = np.random.default_rng(205)
        centers = np.array([[0, 0], [4, 0], [0, 4]], dtype=float)
        x = np.vstack([rng.normal(c, 0.3, (25, 2)) for c in centers])
        est = KMeansLloyd(n_clusters=3, seed=2).fit(x)

        def wcss(labels):
            total = 0.0
            for c in np.unique(labels):
                pts = x[labels == c]
                total += float(((pts - pts.mean(axis=0)) ** 2).sum())
            return total

        for trial in range(100):
            random_labels = rng.integers(1, 4, size=len(x))
            if len(np.unique(random_labels)) < 3:
                continue
            assert est.inertia_ <= wcss(random_labels) + 1e-9

    def test_deterministic_per_seed(self):
        x = np.random.default_rng(206).normal(size=(50, 2))
        a = kmeans(x, 3, seed=9)
        b = kmeans(x, 3, seed=9)
        assert np.array_equal(a, b)

    def test_duplicate_points_never_crash(self):
        x = np.array([[0.0, 0.0]] * 5 + [[1.0, 1.0]] * 5)
        labels = kmeans(x, 3, seed=0)
        assert len(labels) == 10 and labels.min() >= 1

    def test_k_bounds(self):
        x = np.random.default_rng(207).normal(size=(5, 2))
        with pytest.raises(InputError):
            kmeans(x, 6)


class TestPartitionFeatures:
    def test_singleton_cluster_empty(self):
        d = euclid([0.0, 1.0, 2.0])
        vals = intra_distances(d, np.array([1, 1, 2]), 2)
        assert vals.size == 0

    def test_whole_dataset_equals_distance_feature(self):
        data, _ = generate_two_gaussians(15, 0.2, 0.1, seed=31)
        dist = compute_distance_matrix(data, "euclidean")
        vals = intra_distances(dist, np.ones(30, dtype=int), 1)
        feature = extract_distance_feature(dist)
        assert np.array_equal(np.sort(vals), np.sort(feature.values))

    def test_multiset_identity(self):
        rng = np.random.default_rng(208)
        d = euclid(rng.normal(size=(20, 2)))
        dist = DistanceMatrix(d)
        feature = extract_distance_feature(dist)
        for _ in range(20):
            k = int(rng.integers(2, 6))
            labels = rng.integers(1, k + 1, size=20)
            while len(np.unique(labels)) < k:
                labels = rng.integers(1, k + 1, size=20)
            pieces = [intra_distances(dist, labels, c) for c in range(1, k + 1)]
            pieces += [inter_distances(dist, labels, a, b)
                       for a in range(1, k + 1) for b in range(a + 1, k + 1)]
            combined = np.sort(np.concatenate(pieces))
            assert np.array_equal(combined, np.sort(feature.values))

    def test_inter_requires_distinct_clusters(self):
        d = euclid([0.0, 1.0, 2.0])
        with pytest.raises(InputError):
            inter_distances(d, np.array([1, 1, 2]), 1, 1)

    def test_inter_content(self):
        d = euclid([0.0, 1.0, 10.0])
        vals = inter_distances(d, np.array([1, 1, 2]), 1, 2)
        assert sorted(vals.tolist()) == [9.0, 10.0]


class TestEvaluatePartition:
    def test_constant_cluster_passes(self):
        # three equidistant points all at distance 2, boundary above
        d = np.full((3, 3), 2.0)
        np.fill_diagonal(d, 0.0)
        report = evaluate_partition(d, np.array([1, 1, 1]), 3.0)
        check = report.clusters[0]
        assert check.median == 2.0 and check.robust_sd == 0.0
        assert check.criterion == 2.0 and check.passed
        assert report.pct_above == 0.0 and report.overall_pass

    def test_singleton_is_na_and_excluded_from_pool(self):
        d = euclid([0.0, 1.0, 5.0])
        report = evaluate_partition(d, np.array([1, 1, 2]), 2.0)
        singleton = report.clusters[1]
        assert singleton.passed is None and singleton.median is None
        assert report.pct_above == 0.0
        assert report.overall_pass  # only the non-NA cluster counts

    def test_failing_cluster(self):
        d = euclid([0.0, 10.0, 20.0])
        report = evaluate_partition(d, np.array([1, 1, 1]), 2.0)
        assert report.overall_pass is False
        assert report.pct_above == 100.0

    def test_benchmark_intra_fraction_above_published_boundary(self):
        # two-cluster benchmark at shift 0.2 with the published boundary 0.36:
        # about 5 percent of intra distances land above it
        vals = []
        for seed in range(1, 11):
            data, labels = generate_two_gaussians(250, 0.2, 0.1, seed=seed)
            dist = compute_distance_matrix(data, "euclidean")
            vals.append(evaluate_partition(dist, labels.labels, 0.36).pct_above)
        assert np.mean(vals) == pytest.approx(5.1, abs=2.0)

    def test_scale_equivariance_power_of_two(self):
        rng = np.random.default_rng(209)
        d = euclid(rng.normal(size=(25, 3)))
        labels = rng.integers(1, 4, size=25)
        while len(np.unique(labels)) < 3:
            labels = rng.integers(1, 4, size=25)
        base = evaluate_partition(d, labels, 1.5)
        for a in (0.5, 2.0, 8.0):
            scaled = evaluate_partition(a * d, labels, a * 1.5)
            assert scaled.pct_above == base.pct_above
            for b, s in zip(base.clusters, scaled.clusters):
                assert b.passed == s.passed
                assert b.pct_above == s.pct_above

    def test_boundary_must_be_positive(self):
        d = euclid([0.0, 1.0, 2.0])
        with pytest.raises(InputError):
            evaluate_partition(d, np.array([1, 1, 2]), 0.0)

    def test_robust_sd_definition(self):
        vals = np.array([1.0, 2.0, 3.0, 4.0, 100.0])
        med = np.median(vals)
        mad = np.median(np.abs(vals - med))
        assert robust_sd(vals) == pytest.approx(1.4826 * mad)


class TestEvaluateSummary:
    def test_pairs_and_na(self):
        rows = [("good", [(1.0, 0.3), (1.05, 0.3)]),
                ("bad", [(1.2, 0.3), (1.0, 0.2)]),
                ("sparse", [(1.0, 0.2), None])]
        reports = evaluate_summary(rows, 1.40)
        by_name = {r.name: r for r in reports}
        assert by_name["good"].overall_pass is True
        assert by_name["bad"].overall_pass is False
        assert by_name["sparse"].overall_pass is True
        assert by_name["sparse"].clusters[1].passed is None

    def test_boundary_equality_passes(self):
        reports = evaluate_summary([("edge", [(1.0, 0.4)])], 1.40)
        assert reports[0].overall_pass is True


class TestAccuracy:
    def test_identical(self):
        labels = np.array([1, 2, 2, 3, 1])
        assert accuracy(labels, labels) == 1.0

    def test_name_swap_invariance(self):
        a = np.array([1, 1, 2, 2, 3])
        b = np.array([3, 3, 1, 1, 2])
        assert accuracy(a, b) == 1.0

    def test_matches_permutation_oracle(self):
        rng = np.random.default_rng(210)
        for _ in range(30):
            n = int(rng.integers(6, 12))
            a = rng.integers(1, 4, size=n)
            b = rng.integers(1, 4, size=n)
            while len(np.unique(a)) < 3 or len(np.unique(b)) < 3:
                a = rng.integers(1, 4, size=n)
                b = rng.integers(1, 4, size=n)
            assert accuracy(a, b) == pytest.approx(accuracy_oracle(a, b))

    def test_hungarian_path_matches_permutation_oracle(self):
        # 7 labels per side routes through the assignment solver
        rng = np.random.default_rng(211)
        a = rng.integers(1, 8, size=80)
        b = rng.integers(1, 8, size=80)
        while len(np.unique(a)) < 7 or len(np.unique(b)) < 7:
            a = rng.integers(1, 8, size=80)
            b = rng.integers(1, 8, size=80)
        assert accuracy(a, b) == pytest.approx(accuracy_oracle(a, b))

    def test_relabel_invariance_of_either_argument(self):
        rng = np.random.default_rng(212)
        a = rng.integers(1, 4, size=30)
        b = rng.integers(1, 4, size=30)
        while len(np.unique(a)) < 3 or len(np.unique(b)) < 3:
            a = rng.integers(1, 4, size=30)
            b = rng.integers(1, 4, size=30)
        perm = {1: 2, 2: 3, 3: 1}
        a2 = np.vectorize(perm.get)(a)
        assert accuracy(a, b) == accuracy(a2, b)
        assert accuracy(a, b) == accuracy(b, a)

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            accuracy(np.array([1, 2]), np.array([1, 2, 1]))

    def test_too_many_labels(self):
        with pytest.raises(InputError):
            accuracy(np.arange(1, 13), np.arange(1, 13))
