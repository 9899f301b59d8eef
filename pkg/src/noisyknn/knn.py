"""Exact K-nearest-neighbor engine over feature embeddings.

Distances are squared Euclidean.  Every tie has a documented, fully
deterministic resolution: equal distances prefer the smaller training
index, and a plurality tie prefers the tied label with the smallest
summed distance to the query, then the smallest label index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .dataset import FeatureDataset
from .plurality import LabelDistribution

_QUERY_CHUNK = 256


@dataclass(frozen=True)
class NeighborHistogram:
    """Label counts over a size-k neighborhood."""

    counts: np.ndarray
    k: int

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if np.any(c < 0) or int(c.sum()) != self.k:
            raise ValueError("counts must be non-negative and sum to k")
        object.__setattr__(self, "counts", c)

    def distribution(self) -> LabelDistribution:
        return LabelDistribution(self.counts / self.k)


def _check_query(train: FeatureDataset, query: np.ndarray) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (train.features.shape[1],):
        raise ValueError(
            f"query has shape {q.shape}, expected ({train.features.shape[1]},)"
        )
    return q


def _squared_distances(train: FeatureDataset, query: np.ndarray) -> np.ndarray:
    diff = train.features - query
    return np.einsum("ij,ij->i", diff, diff)


def neighbors(train: FeatureDataset, query: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest training points, ordered by ascending
    (squared distance, index)."""
    if k < 1 or k > len(train):
        raise ValueError(f"k must be in [1, {len(train)}], got {k}")
    q = _check_query(train, query)
    d = _squared_distances(train, q)
    return _select_k(d, k)


def _select_k(d: np.ndarray, k: int) -> np.ndarray:
    n = d.shape[0]
    if k >= n:
        return np.lexsort((np.arange(n), d))
    part = np.argpartition(d, k - 1)[:k]
    # boundary distance may be shared; re-rank every candidate at or
    # below it so index tie-breaks stay exact
    kth = d[part].max()
    cand = np.nonzero(d <= kth)[0]
    order = np.lexsort((cand, d[cand]))
    return cand[order[:k]]


def _vote(labels: np.ndarray, d: np.ndarray, nbrs: np.ndarray, num_labels: int) -> int:
    nbr_labels = labels[nbrs]
    hist = np.bincount(nbr_labels, minlength=num_labels)
    top = hist.max()
    tied = np.nonzero(hist == top)[0]
    if tied.size == 1:
        return int(tied[0])
    sums = np.array([d[nbrs[nbr_labels == lab]].sum() for lab in tied])
    return int(tied[sums.argmin()])


def predict(train: FeatureDataset, query: np.ndarray, k: int) -> int:
    """Strict plurality label of the k nearest neighbors."""
    q = _check_query(train, query)
    nbrs = neighbors(train, q, k)
    d = _squared_distances(train, q)
    return _vote(train.labels, d, nbrs, train.num_labels)


def predict_batch(train: FeatureDataset, queries: np.ndarray, k: int) -> np.ndarray:
    """Vectorized predict over many queries; identical results to
    per-query predict."""
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != train.features.shape[1]:
        raise ValueError("queries must be an M x D matrix matching the train dim")
    if k < 1 or k > len(train):
        raise ValueError(f"k must be in [1, {len(train)}], got {k}")
    x = train.features
    x_sq = np.einsum("ij,ij->i", x, x)
    out = np.empty(queries.shape[0], dtype=np.int64)
    for start in range(0, queries.shape[0], _QUERY_CHUNK):
        block = queries[start : start + _QUERY_CHUNK]
        d = x_sq[None, :] - 2.0 * (block @ x.T)
        d += np.einsum("ij,ij->i", block, block)[:, None]
        np.maximum(d, 0.0, out=d)
        for i in range(block.shape[0]):
            nbrs = _select_k(d[i], k)
            out[start + i] = _vote(train.labels, d[i], nbrs, train.num_labels)
    return out


def empirical_accuracy(train: FeatureDataset, test: FeatureDataset, k: int) -> float:
    """Fraction of test samples whose predicted label matches."""
    if len(test) == 0:
        raise ValueError("test set is empty")
    if test.features.shape[1] != train.features.shape[1]:
        raise ValueError("train and test feature dimensions differ")
    preds = predict_batch(train, test.features, k)
    hits = (preds == test.labels).astype(np.float64)
    return float(hits.sum() / hits.size)


def clean_distribution(train: FeatureDataset, query: np.ndarray, k: int) -> LabelDistribution:
    """Normalized label histogram of the k nearest training samples;
    estimates the clean neighborhood distribution when the training
    labels are uncorrupted."""
    nbrs = neighbors(train, query, k)
    hist = np.bincount(train.labels[nbrs], minlength=train.num_labels)
    return NeighborHistogram(hist, k).distribution()


def chi_square_distance(p: LabelDistribution, h: LabelDistribution) -> float:
    """Symmetric histogram distance 0.5 * sum (p-h)^2 / (p+h); bins where
    both vectors are zero contribute nothing."""
    if len(p) != len(h):
        raise ValueError("distributions have different lengths")
    a, b = p.probs, h.probs
    s = a + b
    mask = s > 0
    return float(0.5 * np.sum((a[mask] - b[mask]) ** 2 / s[mask]))


def preferred_k(
    softmax: LabelDistribution,
    train: FeatureDataset,
    query: np.ndarray,
    k_range: Iterable[int],
) -> tuple[int, float]:
    """The k in k_range whose clean-label histogram is chi-square closest
    to the softmax vector; ties go to the smallest k."""
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise ValueError("k_range is empty")
    if ks[0] < 1 or ks[-1] > len(train):
        raise ValueError("k_range must lie within [1, N]")
    q = _check_query(train, query)
    d = _squared_distances(train, q)
    order = np.lexsort((np.arange(d.shape[0]), d))
    ordered_labels = train.labels[order[: ks[-1]]]
    best_k, best_dist = -1, np.inf
    hist = np.zeros(train.num_labels, dtype=np.int64)
    done = 0
    for k in ks:
        for lab in ordered_labels[done:k]:
            hist[lab] += 1
        done = k
        dist = chi_square_distance(softmax, LabelDistribution(hist / k))
        if dist < best_dist:
            best_k, best_dist = k, dist
    return best_k, float(best_dist)
