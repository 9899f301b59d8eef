"""Corruption matrices and label-noise injection.

Randomly-spread regimes (uniform / flip / user matrix) pick floor(gamma*N)
samples without replacement and redraw each picked label from the matrix
row of its current label; a corrupted sample may redraw its own label, so
the realized noise fraction can fall below the nominal gamma.  The
locally-concentrated regime instead relabels one k-means cluster per
class wholesale.

All randomness flows from a single 64-bit seed through counter-based
Philox generators, so runs are reproducible and independent of thread
count.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dataset import FeatureDataset
from .plurality import CorruptionMatrix

REGIMES = ("uniform", "flip", "matrix", "concentrated")
_MASK64 = (1 << 64) - 1


def mix_seed(base: int, *parts: int) -> int:
    """Derive a child seed from a base seed and integer coordinates via
    splitmix64 steps; collision-resistant enough for experiment fan-out."""
    x = base & _MASK64
    for p in parts:
        x = (x + 0x9E3779B97F4A7C15 * (p + 1)) & _MASK64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        x = z ^ (z >> 31)
    return x


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def cyclic_flip_map(l: int) -> np.ndarray:
    """Default flip permutation: each label maps to the next, wrapping."""
    return (np.arange(l) + 1) % l


@dataclass(frozen=True)
class NoiseSpec:
    """Which noise regime to apply, plus exactly its parameters."""

    regime: str
    rng_seed: int
    gamma: Optional[float] = None
    num_labels: Optional[int] = None
    matrix: Optional[CorruptionMatrix] = None
    flip_map: Optional[np.ndarray] = None
    clusters_per_class: Optional[int] = None
    alternative_label_map: Optional[np.ndarray] = None
    allow_fixed_points: bool = False

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown noise regime {self.regime!r}")
        if self.regime == "concentrated":
            if self.gamma is not None or self.matrix is not None or self.flip_map is not None:
                raise ValueError("concentrated noise takes no gamma/matrix/flip_map")
            if self.clusters_per_class is None or self.clusters_per_class < 2:
                raise ValueError("concentrated noise needs clusters_per_class >= 2")
            if self.alternative_label_map is None:
                raise ValueError("concentrated noise needs an alternative_label_map")
            amap = np.asarray(self.alternative_label_map, dtype=np.int64)
            if np.any(amap == np.arange(amap.size)):
                raise ValueError("alternative_label_map may not map a class to itself")
            object.__setattr__(self, "alternative_label_map", amap)
            return
        if self.clusters_per_class is not None or self.alternative_label_map is not None:
            raise ValueError(f"{self.regime} noise takes no clustering parameters")
        if self.gamma is None or not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be given in [0, 1]")
        if self.regime == "uniform":
            if self.matrix is not None or self.flip_map is not None:
                raise ValueError("uniform noise takes no matrix/flip_map")
            if self.num_labels is None or self.num_labels < 1:
                raise ValueError("uniform noise needs num_labels")
        elif self.regime == "flip":
            if self.matrix is not None:
                raise ValueError("flip noise takes no explicit matrix")
            if self.flip_map is None:
                raise ValueError("flip noise needs a flip_map")
            fmap = np.asarray(self.flip_map, dtype=np.int64)
            _check_permutation(fmap, self.allow_fixed_points)
            object.__setattr__(self, "flip_map", fmap)
        else:  # matrix
            if self.flip_map is not None:
                raise ValueError("matrix noise takes no flip_map")
            if self.matrix is None:
                raise ValueError("matrix noise needs a corruption matrix")

    def corruption_matrix(self) -> CorruptionMatrix:
        if self.regime == "uniform":
            return build_matrix("uniform", self.num_labels)
        if self.regime == "flip":
            return build_matrix(
                "flip",
                self.flip_map.size,
                flip_map=self.flip_map,
                allow_fixed_points=self.allow_fixed_points,
            )
        if self.regime == "matrix":
            return self.matrix
        raise ValueError("concentrated noise has no corruption matrix")


@dataclass(frozen=True)
class InjectionReport:
    corrupted_indices: frozenset[int]
    realized_noise_fraction: float
    nominal_gamma: float


def _check_permutation(fmap: np.ndarray, allow_fixed_points: bool) -> None:
    l = fmap.size
    if sorted(fmap.tolist()) != list(range(l)):
        raise ValueError("flip_map must be a permutation of the labels")
    if not allow_fixed_points and np.any(fmap == np.arange(l)):
        raise ValueError("flip_map has a fixed point; pass allow_fixed_points to permit")


def build_matrix(
    regime: str,
    l: int,
    *,
    flip_map: Optional[Sequence[int]] = None,
    matrix: Optional[np.ndarray] = None,
    allow_fixed_points: bool = False,
) -> CorruptionMatrix:
    """Corruption matrix for a randomly-spread regime."""
    if l < 1:
        raise ValueError("l must be >= 1")
    if regime == "uniform":
        return CorruptionMatrix(np.full((l, l), 1.0 / l))
    if regime == "flip":
        if flip_map is None:
            flip_map = cyclic_flip_map(l)
        fmap = np.asarray(flip_map, dtype=np.int64)
        if fmap.size != l:
            raise ValueError("flip_map length must equal l")
        _check_permutation(fmap, allow_fixed_points)
        rows = np.zeros((l, l))
        rows[np.arange(l), fmap] = 1.0
        return CorruptionMatrix(rows)
    if regime == "matrix":
        if matrix is None:
            raise ValueError("matrix regime needs an explicit matrix")
        return CorruptionMatrix(np.asarray(matrix, dtype=np.float64))
    raise ValueError(f"no corruption matrix for regime {regime!r}")


def inject_random_noise(
    labels: np.ndarray, spec: NoiseSpec
) -> tuple[np.ndarray, InjectionReport]:
    """Apply a randomly-spread regime to a label vector.

    Exactly floor(gamma*N) indices are drawn without replacement; each
    redraws its label from the corruption-matrix row of its current
    label.  Deterministic given spec.rng_seed.
    """
    if spec.regime not in ("uniform", "flip", "matrix"):
        raise ValueError(f"inject_random_noise cannot handle {spec.regime!r} noise")
    labels = np.asarray(labels, dtype=np.int64)
    matrix = spec.corruption_matrix()
    l = matrix.num_labels
    if labels.size and (labels.min() < 0 or labels.max() >= l):
        raise ValueError(f"labels must lie in [0, {l})")
    n = labels.size
    m = int(np.floor(spec.gamma * n))
    rng = _rng(spec.rng_seed)
    noisy = labels.copy()
    if m > 0:
        picked = np.sort(rng.choice(n, size=m, replace=False))
        u = rng.random(m)
        cum = np.cumsum(matrix.rows, axis=1)
        cum[:, -1] = 1.0  # guard against rounding in the last bin
        noisy[picked] = np.argmax(u[:, None] < cum[labels[picked]], axis=1)
    else:
        picked = np.empty(0, dtype=np.int64)
    changed = int(np.count_nonzero(noisy != labels))
    report = InjectionReport(
        corrupted_indices=frozenset(int(i) for i in picked),
        realized_noise_fraction=changed / n if n else 0.0,
        nominal_gamma=float(spec.gamma),
    )
    return noisy, report


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int,
    max_iter: int = 300,
    objective_history: Optional[list] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd's algorithm with k-means++ seeding.

    Stops when assignments no longer change (or after max_iter); an
    emptied cluster is re-seeded to the point farthest from its assigned
    centroid.  Pass a list as objective_history to record the objective
    after each assignment step.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if k < 1 or k > n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = _rng(seed)
    centroids = _kmeans_pp_init(points, k, rng)
    assign = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iter):
        d = _pairwise_sq(points, centroids)
        new_assign = d.argmin(axis=1)
        dist_to_own = d[np.arange(n), new_assign]
        for c in range(k):
            if not np.any(new_assign == c):
                far = int(dist_to_own.argmax())
                centroids[c] = points[far]
                new_assign[far] = c
                dist_to_own[far] = 0.0
        if objective_history is not None:
            objective_history.append(kmeans_objective(points, new_assign, centroids))
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(k):
            centroids[c] = points[assign == c].mean(axis=0)
    return assign, centroids


def _pairwise_sq(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = np.einsum("ij,ij->i", a, a)[:, None] - 2.0 * (a @ b.T)
    d += np.einsum("ij,ij->i", b, b)[None, :]
    np.maximum(d, 0.0, out=d)
    return d


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    closest = _pairwise_sq(points, centroids[:1])[:, 0]
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = int(rng.integers(n))  # all points coincide with a centroid
        else:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(closest), r, side="right"))
            idx = min(idx, n - 1)
        centroids[c] = points[idx]
        np.minimum(closest, _pairwise_sq(points, centroids[c : c + 1])[:, 0], out=closest)
    return centroids


def kmeans_objective(points: np.ndarray, assign: np.ndarray, centroids: np.ndarray) -> float:
    diff = points - centroids[assign]
    return float(np.einsum("ij,ij->", diff, diff))


def inject_concentrated_noise(
    data: FeatureDataset, spec: NoiseSpec
) -> tuple[np.ndarray, InjectionReport]:
    """Relabel one k-means cluster per class to that class's alternative
    label; the cluster is drawn uniformly from the seeded generator."""
    if spec.regime != "concentrated":
        raise ValueError("spec regime must be 'concentrated'")
    amap = spec.alternative_label_map
    if amap.size != data.num_labels:
        raise ValueError("alternative_label_map length must equal num_labels")
    if amap.size and (amap.min() < 0 or amap.max() >= data.num_labels):
        raise ValueError("alternative_label_map targets out of range")
    kc = spec.clusters_per_class
    noisy = data.labels.copy()
    corrupted: list[int] = []
    for cls in range(data.num_labels):
        members = np.nonzero(data.labels == cls)[0]
        if members.size < kc:
            raise ValueError(
                f"class {cls} has {members.size} samples, fewer than {kc} clusters"
            )
        class_seed = mix_seed(spec.rng_seed, cls)
        assign, _ = kmeans(data.features[members], kc, seed=class_seed)
        chosen = int(_rng(mix_seed(class_seed, 1)).integers(kc))
        hit = members[assign == chosen]
        noisy[hit] = amap[cls]
        corrupted.extend(int(i) for i in hit)
    frac = len(corrupted) / len(data) if len(data) else 0.0
    report = InjectionReport(
        corrupted_indices=frozenset(corrupted),
        realized_noise_fraction=frac,
        nominal_gamma=frac,
    )
    return noisy, report
