import numpy as np
import pytest

from noisyknn import FeatureDataset, LabelDistribution, NeighborhoodSpec
from noisyknn.oracle import enumerate_accuracy, knn_reference_predict


class TestEnumerateAccuracy:
    def test_k1(self):
        spec = NeighborhoodSpec(k=1, num_labels=2, correct_label=0)
        res = enumerate_accuracy(spec, LabelDistribution([0.9, 0.1]))
        assert res.q_correct == pytest.approx(0.9, abs=1e-15)
        assert res.tie_mass == 0.0

    def test_even_split_tie(self):
        spec = NeighborhoodSpec(k=2, num_labels=2, correct_label=0)
        res = enumerate_accuracy(spec, LabelDistribution([0.5, 0.5]))
        assert res.q_correct == pytest.approx(0.25, abs=1e-15)
        assert res.tie_mass == pytest.approx(0.5, abs=1e-15)

    def test_three_draws(self):
        spec = NeighborhoodSpec(k=3, num_labels=2, correct_label=0)
        res = enumerate_accuracy(spec, LabelDistribution([0.8, 0.2]))
        assert res.q_correct == pytest.approx(0.896, abs=1e-12)

    def test_budget_guard(self):
        spec = NeighborhoodSpec(k=30, num_labels=4, correct_label=0)
        with pytest.raises(ValueError, match="budget of 1000"):
            enumerate_accuracy(spec, LabelDistribution([0.25] * 4), budget=1000)

    def test_masses_partition_unity(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            l = int(rng.integers(2, 5))
            k = int(rng.integers(1, 8))
            q = LabelDistribution(rng.dirichlet(np.ones(l)))
            res = enumerate_accuracy(NeighborhoodSpec(k=k, num_labels=l, correct_label=0), q)
            masses = np.append(res.per_label_mass, res.tie_mass)
            assert np.all(masses >= 0) and np.all(masses <= 1)
            assert masses.sum() == pytest.approx(1.0, abs=1e-12)
            assert res.q_correct == res.per_label_mass[0]


class TestReferencePredictor:
    def test_exact_match_k1(self):
        train = FeatureDataset([[0.0, 0.0], [5.0, 5.0]], [1, 0], 2)
        assert knn_reference_predict(train, np.array([0.0, 0.0]), 1) == 1

    def test_clear_majority(self):
        train = FeatureDataset([[1.0], [2.0], [3.0]], [0, 0, 1], 2)
        assert knn_reference_predict(train, np.array([0.0]), 3) == 0

    def test_plurality_tie_uses_summed_distance(self):
        # labels 0 and 1 tied 2-2 at k=4; label 1 is nearer in sum
        train = FeatureDataset([[1.0], [4.0], [2.0], [3.0]], [0, 0, 1, 1], 2)
        assert knn_reference_predict(train, np.array([0.0]), 4) == 1

    def test_empty_train_rejected(self):
        train = FeatureDataset(np.empty((0, 2)), np.empty(0, dtype=int), 2)
        with pytest.raises(ValueError):
            knn_reference_predict(train, np.zeros(2), 1)
