import numpy as np
import pytest

from vibrodiag import clustering, metrics
from vibrodiag.clustering import OUTLIER, SomMap, StreamState
from vibrodiag.errors import EmptyInput, KTooLarge, UsageError


def blobs(centers, n_per, spread=1.0, seed=0, dim=None):
    rng = np.random.default_rng(seed)
    pts, labels = [], []
    for i, c in enumerate(centers):
        c = np.asarray(c, dtype=np.float64)
        if dim:
            c = np.pad(c, (0, dim - len(c)))
        pts.append(c + spread * rng.normal(size=(n_per, len(c))))
        labels.extend([i] * n_per)
    return np.vstack(pts), np.array(labels)


class TestKmeans:
    def test_k1_closed_form(self):
        x, _ = blobs([[0, 0]], 20, seed=1)
        labels, centroids, inertia = clustering.kmeans(x, 1, seed=0)
        assert set(labels.tolist()) == {0}
        np.testing.assert_allclose(centroids[0], x.mean(axis=0))
        np.testing.assert_allclose(inertia, ((x - x.mean(axis=0)) ** 2).sum())

    def test_two_separated_blobs_exact_partition(self):
        x, truth = blobs([[0, 0], [20, 0]], 25, seed=2)
        labels, _, _ = clustering.kmeans(x, 2, seed=0)
        t = metrics.contingency(truth.tolist(), labels.tolist())
        assert metrics.adjusted_rand_index(t) == 1.0

    def test_k_equals_n(self):
        x, _ = blobs([[0, 0]], 6, seed=3)
        labels, _, inertia = clustering.kmeans(x, 6, seed=0)
        assert len(set(labels.tolist())) == 6
        assert inertia < 1e-20

    def test_k_too_large(self):
        x, _ = blobs([[0, 0]], 4, seed=4)
        with pytest.raises(KTooLarge):
            clustering.kmeans(x, 5)

    def test_inertia_nonincreasing_within_lloyd(self):
        # One restart, forced initial centroids: inertia can only drop.
        rng = np.random.default_rng(5)
        x = rng.normal(size=(40, 3))
        centroids = x[:4].copy()
        inertias = []
        for _ in range(10):
            d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
            labels = d2.argmin(axis=1)
            inertias.append(d2[np.arange(len(x)), labels].sum())
            for j in range(4):
                if (labels == j).any():
                    centroids[j] = x[labels == j].mean(axis=0)
        assert all(b <= a + 1e-9 for a, b in zip(inertias, inertias[1:]))

    def test_permutation_invariance_via_ari(self):
        x, _ = blobs([[0, 0], [9, 0], [0, 9]], 15, spread=0.5, seed=6)
        labels_a, _, _ = clustering.kmeans(x, 3, seed=0)
        perm = np.random.default_rng(1).permutation(len(x))
        labels_b, _, _ = clustering.kmeans(x[perm], 3, seed=0)
        unpermuted = np.empty_like(labels_b)
        unpermuted[perm] = labels_b
        t = metrics.contingency(labels_a.tolist(), unpermuted.tolist())
        assert metrics.adjusted_rand_index(t) == 1.0

    def test_deterministic(self):
        x, _ = blobs([[0, 0], [5, 5]], 20, seed=7)
        a = clustering.kmeans(x, 2, seed=3)
        b = clustering.kmeans(x, 2, seed=3)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])


class TestElbow:
    def test_inertia_nonincreasing_in_k(self):
        x, _ = blobs([[0, 0], [8, 0], [0, 8]], 15, seed=8)
        curve, _ = clustering.kmeans_elbow(x, list(range(1, 8)), seed=0)
        inertias = [v for _, v in curve]
        assert all(b <= a + 1e-9 for a, b in zip(inertias, inertias[1:]))

    def test_knee_at_five_blobs(self):
        centers = [[0, 0], [30, 0], [0, 30], [30, 30], [15, 60]]
        x, _ = blobs(centers, 20, spread=0.8, seed=9)
        _, knee = clustering.kmeans_elbow(x, list(range(1, 11)), seed=0)
        assert knee == 5

    def test_single_k_no_suggestion(self):
        x, _ = blobs([[0, 0]], 10, seed=10)
        curve, knee = clustering.kmeans_elbow(x, [1], seed=0)
        assert len(curve) == 1
        assert knee is None


class TestOptics:
    def test_fewer_than_min_samples_all_outliers(self):
        x = np.random.default_rng(0).normal(size=(3, 4))
        res = clustering.optics(x, min_samples=5)
        assert np.all(res.labels == OUTLIER)

    def test_two_blobs_plus_isolated_point(self):
        x, truth = blobs([[0, 0], [20, 0]], 30, spread=0.25, seed=11)
        x = np.vstack([x, [[10.0, 40.0]]])
        res = clustering.optics(x, min_samples=5, xi=0.2)
        # xi extraction may split a blob, but never merges across the gap.
        assert res.n_clusters >= 2
        assert res.labels[-1] == OUTLIER
        # Density oracle: no extracted cluster spans both planted blobs.
        for cl in range(res.n_clusters):
            members = truth[res.labels[:60] == cl]
            assert len(set(members.tolist())) == 1

    def test_reachability_on_1d_equally_spaced(self):
        # Exhaustive k-NN oracle: with min_samples=2 on an equally spaced
        # line, every core distance is the grid step; reachability of each
        # point (after the first) equals the step as well.
        step = 2.0
        x = (np.arange(10) * step).reshape(-1, 1)
        res = clustering.optics(x, min_samples=2, xi=0.05)
        np.testing.assert_allclose(res.core_distances, step)
        reach = res.reachability[res.ordering]
        assert np.isinf(reach[0])
        np.testing.assert_allclose(reach[1:], step)

    def test_min_cluster_size_respected(self):
        x, _ = blobs([[0, 0], [30, 0]], 20, spread=0.3, seed=12)
        res = clustering.optics(x, min_samples=5)
        for cl in range(res.n_clusters):
            assert (res.labels == cl).sum() >= 5

    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            clustering.optics(np.empty((0, 3)))


class TestSom:
    def test_single_repeated_sample_converges_to_it(self):
        sample = np.array([3.0, -1.0, 2.0])
        x = np.tile(sample, (5, 1))
        som = clustering.som_fit(
            x, SomMap(rows=3, cols=3, iterations=2000), seed=0
        )
        bmu = som.bmu(sample)
        np.testing.assert_allclose(som.flat_codebook()[bmu], sample, atol=1e-3)

    def test_codebook_copy_of_data_zero_lr_quantization_zero(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=(4, 2))
        som = SomMap(rows=2, cols=2, lr0=0.0, lr_end=0.0, iterations=10)
        som.codebook = x.reshape(2, 2, 2).copy()
        som = clustering.som_fit(x, som, seed=0)
        assignments = clustering.som_assign(som, x)
        from vibrodiag.metrics import som_quantization_error

        assert som_quantization_error(som, x) < 1e-12
        d = np.linalg.norm(
            x[:, None, :] - som.flat_codebook()[None, :, :], axis=2
        )
        np.testing.assert_array_equal(assignments, d.argmin(axis=1))

    def test_1d_data_two_cell_map_splits_range(self):
        x = np.arange(100, dtype=np.float64).reshape(-1, 1)
        som = clustering.som_fit(
            x,
            SomMap(rows=2, cols=1, sigma0=1.0, sigma_end=0.2, iterations=4000),
            seed=1,
        )
        values = sorted(som.flat_codebook().ravel().tolist())
        # K-means-like limit: the two codebook vectors approach the half means
        # 24.5 and 74.5; each cell captures one half of the range (+-5).
        assert abs(values[0] - 24.5) <= 5
        assert abs(values[1] - 74.5) <= 5

    def test_trained_map_beats_single_cell_quantization(self):
        from vibrodiag.metrics import som_quantization_error

        x, _ = blobs([[0, 0], [10, 0], [0, 10]], 30, seed=14)
        som = clustering.som_fit(
            x, SomMap(rows=4, cols=4, iterations=3000), seed=7
        )
        # 16 codebook vectors must quantize better than collapsing all
        # data onto its centroid.
        one_cell = np.linalg.norm(x - x.mean(axis=0), axis=1).mean()
        assert som_quantization_error(som, x) < one_cell

    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            clustering.som_fit(np.empty((0, 2)))
        som = SomMap(rows=2, cols=2, codebook=np.zeros((2, 2, 2)))
        with pytest.raises(EmptyInput):
            clustering.som_assign(som, np.empty((0, 2)))


class TestStreaming:
    def test_kmeans_rejected(self):
        with pytest.raises(UsageError):
            StreamState(method="kmeans")

    def test_empty_stream_zero_snapshots(self):
        state = StreamState(method="optics")
        assert state.snapshots == []

    def test_healthy_only_first_batch_single_cluster(self):
        x, _ = blobs([[0, 0]], 60, spread=0.3, seed=15, dim=8)
        state = StreamState(method="optics", params={"min_samples": 5})
        clustering.stream_cluster(state, x)
        assert state.snapshots[-1].n_clusters == 1

    def test_novel_blob_increases_cluster_count(self):
        healthy, _ = blobs([[0, 0]], 40, spread=0.3, seed=16, dim=8)
        novel, _ = blobs([[50, 0]], 15, spread=0.3, seed=17, dim=8)
        state = StreamState(method="optics", params={"min_samples": 5})
        clustering.stream_cluster(state, healthy)
        before = state.snapshots[-1].n_clusters
        clustering.stream_cluster(state, novel)
        assert state.snapshots[-1].n_clusters >= before + 1

    def test_snapshot_is_pure_function_of_batches_and_seed(self):
        b1, _ = blobs([[0, 0]], 20, seed=18, dim=4)
        b2, _ = blobs([[30, 0]], 20, seed=19, dim=4)

        def run():
            state = StreamState(method="som", params={"rows": 4, "cols": 4, "iterations": 500}, seed=5)
            clustering.stream_cluster(state, b1)
            clustering.stream_cluster(state, b2)
            return state.snapshots

        snaps_a, snaps_b = run(), run()
        for a, b in zip(snaps_a, snaps_b):
            np.testing.assert_array_equal(a.labels, b.labels)

    def test_step_t_uses_first_t_batches(self):
        b1, _ = blobs([[0, 0]], 10, seed=20, dim=4)
        b2, _ = blobs([[9, 9]], 10, seed=21, dim=4)
        state = StreamState(method="optics", params={"min_samples": 5})
        clustering.stream_cluster(state, b1)
        clustering.stream_cluster(state, b2)
        assert state.snapshots[0].n_samples == 10
        assert state.snapshots[1].n_samples == 20
        assert len(state.snapshots[1].labels) == 20
