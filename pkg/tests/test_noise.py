import numpy as np
import pytest
from scipy import stats

from noisyknn import (
    FeatureDataset,
    NoiseSpec,
    build_matrix,
    cyclic_flip_map,
    inject_concentrated_noise,
    inject_random_noise,
    kmeans,
    mix_seed,
)
from noisyknn.noise import kmeans_objective

from conftest import make_subblob_data


class TestBuildMatrix:
    def test_uniform(self):
        m = build_matrix("uniform", 4)
        np.testing.assert_allclose(m.rows, 0.25)

    def test_flip_cyclic(self):
        m = build_matrix("flip", 3, flip_map=[1, 2, 0])
        expected = np.zeros((3, 3))
        expected[0, 1] = expected[1, 2] = expected[2, 0] = 1.0
        np.testing.assert_array_equal(m.rows, expected)

    def test_bad_row_sum(self):
        bad = np.array([[1.0, 0.0], [0.45, 0.45]])
        with pytest.raises(ValueError, match="row 1"):
            build_matrix("matrix", 2, matrix=bad)

    def test_flip_fixed_point_rejected(self):
        with pytest.raises(ValueError, match="fixed point"):
            build_matrix("flip", 3, flip_map=[0, 2, 1])

    def test_flip_fixed_point_allowed_explicitly(self):
        m = build_matrix("flip", 3, flip_map=[0, 2, 1], allow_fixed_points=True)
        assert m.rows[0, 0] == 1.0


class TestNoiseSpec:
    def test_regime_field_discipline(self):
        with pytest.raises(ValueError):
            NoiseSpec("uniform", 1, gamma=0.2)  # missing num_labels
        with pytest.raises(ValueError):
            NoiseSpec("flip", 1, gamma=0.2, flip_map=[1, 0], clusters_per_class=2)
        with pytest.raises(ValueError):
            NoiseSpec("concentrated", 1, gamma=0.2, clusters_per_class=2,
                      alternative_label_map=[1, 0])

    def test_self_target_rejected(self):
        with pytest.raises(ValueError, match="itself"):
            NoiseSpec("concentrated", 1, clusters_per_class=2,
                      alternative_label_map=[0, 1])


class TestInjectRandomNoise:
    def test_gamma_zero_noop(self):
        labels = np.array([0, 1, 2, 1, 0])
        spec = NoiseSpec("uniform", 99, gamma=0.0, num_labels=3)
        noisy, report = inject_random_noise(labels, spec)
        np.testing.assert_array_equal(noisy, labels)
        assert report.corrupted_indices == frozenset()
        assert report.realized_noise_fraction == 0.0

    def test_full_flip(self):
        labels = np.array([0, 1, 2, 0, 1])
        spec = NoiseSpec("flip", 7, gamma=1.0, flip_map=[1, 2, 0])
        noisy, report = inject_random_noise(labels, spec)
        np.testing.assert_array_equal(noisy, (labels + 1) % 3)
        assert report.realized_noise_fraction == 1.0

    def test_exact_corruption_count(self):
        labels = np.zeros(1000, dtype=int)
        for gamma in (0.1, 0.333, 0.77):
            spec = NoiseSpec("uniform", 5, gamma=gamma, num_labels=4)
            _, report = inject_random_noise(labels, spec)
            assert len(report.corrupted_indices) == int(np.floor(gamma * 1000))

    def test_deterministic_given_seed(self):
        labels = np.arange(500) % 6
        spec = NoiseSpec("uniform", 1234, gamma=0.4, num_labels=6)
        a, ra = inject_random_noise(labels, spec)
        b, rb = inject_random_noise(labels, spec)
        np.testing.assert_array_equal(a, b)
        assert ra == rb

    def test_uniform_realized_fraction(self):
        # corrupted labels redraw uniformly, so a 1/L share lands back on
        # the original label: realized ~= gamma * (1 - 1/L)
        n, l, gamma = 10000, 10, 0.5
        labels = np.arange(n) % l
        spec = NoiseSpec("uniform", 2024, gamma=gamma, num_labels=l)
        _, report = inject_random_noise(labels, spec)
        m = int(gamma * n)
        expected = gamma * (1 - 1 / l)
        se = np.sqrt(m * (1 - 1 / l) * (1 / l)) / n
        assert abs(report.realized_noise_fraction - expected) <= 3 * se

    def test_target_histogram_matches_matrix_row(self):
        # chi-square goodness of fit on the labels drawn for corrupted
        # samples of a single class
        n, l = 20000, 5
        labels = np.full(n, 2)
        row = np.array([0.1, 0.2, 0.05, 0.35, 0.3])
        m = np.tile(row, (l, 1))
        spec = NoiseSpec("matrix", 31337, gamma=1.0,
                         matrix=build_matrix("matrix", l, matrix=m))
        noisy, _ = inject_random_noise(labels, spec)
        counts = np.bincount(noisy, minlength=l)
        _, p = stats.chisquare(counts, row * n)
        assert p >= 0.001

    def test_label_out_of_range(self):
        spec = NoiseSpec("uniform", 1, gamma=0.5, num_labels=3)
        with pytest.raises(ValueError, match="labels must lie"):
            inject_random_noise(np.array([0, 3]), spec)


class TestKMeans:
    def test_single_cluster_is_mean(self):
        pts = np.random.default_rng(0).standard_normal((40, 3))
        assign, cent = kmeans(pts, 1, seed=1)
        assert set(assign.tolist()) == {0}
        np.testing.assert_allclose(cent[0], pts.mean(axis=0), atol=1e-12)

    def test_two_blobs_separated_exactly(self):
        rng = np.random.default_rng(2)
        a = np.array([-10.0, 0.0]) + 0.1 * rng.standard_normal((30, 2))
        b = np.array([10.0, 0.0]) + 0.1 * rng.standard_normal((30, 2))
        pts = np.concatenate([a, b])
        assign, _ = kmeans(pts, 2, seed=3)
        assert len(set(assign[:30].tolist())) == 1
        assert len(set(assign[30:].tolist())) == 1
        assert assign[0] != assign[30]

    def test_k_equals_n(self):
        pts = np.arange(8.0)[:, None]
        assign, _ = kmeans(pts, 8, seed=4)
        assert sorted(assign.tolist()) == list(range(8))

    def test_objective_non_increasing(self):
        rng = np.random.default_rng(6)
        pts = rng.standard_normal((200, 4))
        history = []
        kmeans(pts, 5, seed=7, objective_history=history)
        assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))

    def test_k_too_large(self):
        with pytest.raises(ValueError):
            kmeans(np.zeros((3, 2)), 4, seed=0)


class TestInjectConcentratedNoise:
    def test_relabels_exactly_one_subblob_per_class(self):
        data, region = make_subblob_data(3, 100, 6, noisy_share=0.3, seed=10)
        spec = NoiseSpec("concentrated", 42, clusters_per_class=2,
                         alternative_label_map=cyclic_flip_map(3))
        noisy, report = inject_concentrated_noise(data, spec)
        changed = noisy != data.labels
        # whichever cluster was picked, it is one whole sub-blob: the
        # changed set within each class is one of the two regions
        for cls in range(3):
            members = data.labels == cls
            share = changed[members].mean()
            assert min(abs(share - 0.3), abs(share - 0.7)) < 1e-12
            hit_regions = set(region[members & changed].tolist())
            assert len(hit_regions) == 1
        np.testing.assert_array_equal(
            noisy[changed], spec.alternative_label_map[data.labels[changed]]
        )
        # untouched labels are bit-identical
        np.testing.assert_array_equal(noisy[~changed], data.labels[~changed])
        assert report.realized_noise_fraction == pytest.approx(changed.mean())

    def test_singleton_clusters(self):
        rng = np.random.default_rng(3)
        feats = rng.standard_normal((8, 2)) * 10
        data = FeatureDataset(feats, np.array([0, 0, 0, 0, 1, 1, 1, 1]), 2)
        spec = NoiseSpec("concentrated", 5, clusters_per_class=4,
                         alternative_label_map=[1, 0])
        noisy, report = inject_concentrated_noise(data, spec)
        assert int((noisy != data.labels).sum()) == 2  # one sample per class

    def test_class_smaller_than_k(self):
        data = FeatureDataset(np.zeros((3, 2)), np.array([0, 0, 1]), 2)
        spec = NoiseSpec("concentrated", 5, clusters_per_class=2,
                         alternative_label_map=[1, 0])
        with pytest.raises(ValueError, match="class 1"):
            inject_concentrated_noise(data, spec)

    def test_deterministic(self):
        data, _ = make_subblob_data(2, 60, 4, noisy_share=0.25, seed=20)
        spec = NoiseSpec("concentrated", 77, clusters_per_class=2,
                         alternative_label_map=[1, 0])
        a, _ = inject_concentrated_noise(data, spec)
        b, _ = inject_concentrated_noise(data, spec)
        np.testing.assert_array_equal(a, b)


def test_mix_seed_spreads():
    seeds = {mix_seed(5, r, g) for r in range(10) for g in range(10)}
    assert len(seeds) == 100
