import numpy as np
import pytest

from noisyknn import FeatureDataset, LabelDistribution, NeighborhoodSpec, plurality_accuracy


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # trigger JIT compilation once so timed tests measure steady state
    spec = NeighborhoodSpec(k=5, num_labels=3, correct_label=0)
    plurality_accuracy(spec, LabelDistribution([0.5, 0.3, 0.2]))


def make_blobs(num_labels, per_class, dim, sep, seed, spread=1.0):
    """Gaussian blob per class, centered at sep * e_class."""
    rng = np.random.default_rng(seed)
    feats = []
    labels = []
    for cls in range(num_labels):
        center = np.zeros(dim)
        center[cls % dim] = sep
        center[(cls + 1) % dim] = sep * (cls // dim + 1)
        feats.append(center + spread * rng.standard_normal((per_class, dim)))
        labels.append(np.full(per_class, cls))
    order = rng.permutation(num_labels * per_class)
    return FeatureDataset(
        np.concatenate(feats)[order], np.concatenate(labels)[order], num_labels
    )


def make_subblob_data(num_labels, per_class, dim, noisy_share, seed, sep=40.0):
    """Each class is two well-separated sub-blobs; the second holds
    noisy_share of the class and is the intended noisy region.

    Returns (dataset, noisy_region_mask).
    """
    rng = np.random.default_rng(seed)
    feats = []
    labels = []
    region = []
    n_noisy = int(round(noisy_share * per_class))
    for cls in range(num_labels):
        base = np.zeros(dim)
        base[cls % dim] = 3 * sep * (1 + cls // dim)
        clean = base + rng.standard_normal((per_class - n_noisy, dim))
        shifted = base.copy()
        shifted[(cls + 1) % dim] += sep
        noisy = shifted + rng.standard_normal((n_noisy, dim))
        feats.append(np.concatenate([clean, noisy]))
        labels.append(np.full(per_class, cls))
        region.append(np.concatenate([np.zeros(per_class - n_noisy, bool), np.ones(n_noisy, bool)]))
    order = rng.permutation(num_labels * per_class)
    data = FeatureDataset(
        np.concatenate(feats)[order], np.concatenate(labels)[order], num_labels
    )
    return data, np.concatenate(region)[order]
