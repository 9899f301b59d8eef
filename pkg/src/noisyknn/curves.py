"""Accuracy-versus-noise-level curves, analytic and empirical.

The analytic side averages, per noise level, the plurality-win
probability over per-sample clean neighborhood distributions.  The
empirical side injects noise into the training labels and scores the
K-NN engine on the clean test set.  Reductions are index-ordered, so
results do not depend on the thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import knn
from .dataset import FeatureDataset
from .noise import (
    NoiseSpec,
    cyclic_flip_map,
    inject_concentrated_noise,
    inject_random_noise,
    mix_seed,
)
from .plurality import (
    CorruptionMatrix,
    LabelDistribution,
    NeighborhoodSpec,
    concentrated_accuracy,
    noisy_distribution,
    plurality_accuracy,
)

CURVE_KINDS = ("analytic", "empirical", "concentrated")


@dataclass(frozen=True)
class AccuracyCurve:
    gammas: np.ndarray
    accuracies: np.ndarray
    kind: str
    k: int
    noise: str
    stds: Optional[np.ndarray] = None

    def __post_init__(self):
        g = np.asarray(self.gammas, dtype=np.float64)
        a = np.asarray(self.accuracies, dtype=np.float64)
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if g.ndim != 1 or a.shape != g.shape:
            raise ValueError("gammas and accuracies must be matching 1-D arrays")
        if g.size and (g.min() < 0 or g.max() > 1 or np.any(np.diff(g) <= 0)):
            raise ValueError("gammas must be strictly increasing within [0, 1]")
        if a.size and (a.min() < -1e-12 or a.max() > 1 + 1e-12):
            raise ValueError("accuracies must lie in [0, 1]")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "accuracies", a)
        if self.stds is not None:
            s = np.asarray(self.stds, dtype=np.float64)
            if s.shape != g.shape:
                raise ValueError("stds must match the gamma grid")
            object.__setattr__(self, "stds", s)

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.gammas.tolist(), self.accuracies.tolist()))


def _check_grid(gamma_grid: Sequence[float]) -> np.ndarray:
    g = np.asarray(list(gamma_grid), dtype=np.float64)
    if g.size == 0:
        raise ValueError("gamma grid is empty")
    if g.min() < 0 or g.max() > 1 or np.any(np.diff(g) <= 0):
        raise ValueError("gamma grid must be strictly increasing within [0, 1]")
    return g


def analytic_curve(
    clean_dists: Sequence[tuple[LabelDistribution, int]],
    k: int,
    matrix: CorruptionMatrix,
    gamma_grid: Sequence[float],
    threads: int = 1,
) -> AccuracyCurve:
    """Mean plurality-win probability per noise level.

    clean_dists pairs each test sample's clean neighborhood distribution
    with its correct label; distributions may come from clean K-NN
    histograms or from softmax vectors.
    """
    grid = _check_grid(gamma_grid)
    if not clean_dists:
        raise ValueError("clean_dists is empty")
    l = matrix.num_labels
    for dist, correct in clean_dists:
        if len(dist) != l:
            raise ValueError("distribution length does not match the matrix")
        if not 0 <= correct < l:
            raise ValueError("correct label out of range")

    def one_gamma(gamma: float) -> float:
        cache: dict[tuple[bytes, int], float] = {}
        vals = []
        for dist, correct in clean_dists:
            q = noisy_distribution(dist, gamma, matrix)
            key = (q.probs.tobytes(), correct)
            if key not in cache:
                spec = NeighborhoodSpec(k=k, num_labels=l, correct_label=correct)
                cache[key] = plurality_accuracy(spec, q)
            vals.append(cache[key])
        return math.fsum(vals) / len(vals)

    accs = _ordered_map(one_gamma, grid.tolist(), threads)
    return AccuracyCurve(grid, np.array(accs), kind="analytic", k=k, noise="analytic")


def _ordered_map(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def empirical_curve(
    train: FeatureDataset,
    test: FeatureDataset,
    k: int,
    regime: str,
    gamma_grid: Sequence[float],
    repeats: int,
    base_seed: int,
    matrix: Optional[CorruptionMatrix] = None,
    flip_map: Optional[np.ndarray] = None,
    threads: int = 1,
) -> AccuracyCurve:
    """Mean and sample standard deviation of K-NN accuracy on the clean
    test set, after injecting noise into the training labels.

    Repeat r at grid index g draws its seed as mix_seed(base_seed, r, g),
    so runs are reproducible and repeats never share a seed.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    grid = _check_grid(gamma_grid)

    def spec_for(gamma: float, seed: int) -> NoiseSpec:
        if regime == "uniform":
            return NoiseSpec("uniform", seed, gamma=gamma, num_labels=train.num_labels)
        if regime == "flip":
            fmap = flip_map if flip_map is not None else cyclic_flip_map(train.num_labels)
            return NoiseSpec("flip", seed, gamma=gamma, flip_map=fmap)
        if regime == "matrix":
            return NoiseSpec("matrix", seed, gamma=gamma, matrix=matrix)
        raise ValueError(f"empirical_curve cannot handle {regime!r} noise")

    def one_point(g_idx: int) -> tuple[float, float]:
        gamma = float(grid[g_idx])
        accs = []
        for r in range(repeats):
            seed = mix_seed(base_seed, r, g_idx)
            noisy, _ = inject_random_noise(train.labels, spec_for(gamma, seed))
            accs.append(knn.empirical_accuracy(train.with_labels(noisy), test, k))
        mean = math.fsum(accs) / repeats
        if repeats == 1:
            return mean, 0.0
        var = math.fsum((a - mean) ** 2 for a in accs) / (repeats - 1)
        return mean, math.sqrt(var)

    results = _ordered_map(one_point, list(range(grid.size)), threads)
    means = np.array([m for m, _ in results])
    stds = np.array([s for _, s in results])
    return AccuracyCurve(grid, means, kind="empirical", k=k, noise=regime, stds=stds)


def concentrated_curve(
    train: FeatureDataset,
    test: FeatureDataset,
    k: int,
    clusters_grid: Sequence[int],
    alternative_label_map: np.ndarray,
    base_seed: int,
    threads: int = 1,
) -> tuple[AccuracyCurve, AccuracyCurve]:
    """Empirical accuracy at the realized noise fraction of each
    clusters-per-class setting, plus the 1 - gamma reference line."""
    clusters = list(clusters_grid)
    if not clusters:
        raise ValueError("clusters grid is empty")

    def one_point(idx: int) -> tuple[float, float]:
        kc = clusters[idx]
        spec = NoiseSpec(
            "concentrated",
            mix_seed(base_seed, idx),
            clusters_per_class=kc,
            alternative_label_map=alternative_label_map,
        )
        noisy, report = inject_concentrated_noise(train, spec)
        acc = knn.empirical_accuracy(train.with_labels(noisy), test, k)
        return report.realized_noise_fraction, acc

    pts = _ordered_map(one_point, list(range(len(clusters))), threads)
    pts.sort(key=lambda p: p[0])
    gammas = np.array([g for g, _ in pts])
    accs = np.array([a for _, a in pts])
    curve = AccuracyCurve(gammas, accs, kind="concentrated", k=k, noise="concentrated")
    ref = AccuracyCurve(
        gammas,
        np.array([concentrated_accuracy(g) for g in gammas]),
        kind="concentrated",
        k=k,
        noise="concentrated-reference",
    )
    return curve, ref
