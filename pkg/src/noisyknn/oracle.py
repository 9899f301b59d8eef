"""Exhaustive reference implementations for cross-checking the fast paths.

Nothing here is a performance path: the enumeration visits every one of
the L^K label strings, and the reference K-NN predictor does a full sort
of all training distances.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .dataset import FeatureDataset
from .plurality import LabelDistribution, NeighborhoodSpec

DEFAULT_STRING_BUDGET = 10**8
_CHUNK = 1 << 16


@dataclass(frozen=True)
class EnumerationResult:
    q_correct: float
    tie_mass: float
    per_label_mass: np.ndarray


def enumerate_accuracy(
    spec: NeighborhoodSpec,
    q: LabelDistribution,
    budget: int = DEFAULT_STRING_BUDGET,
) -> EnumerationResult:
    """Walk all L^K label strings, weigh each by its draw probability,
    and classify it by its strict-plurality winner (or tie)."""
    k, l = spec.k, spec.num_labels
    if len(q) != l:
        raise ValueError(f"q has {len(q)} labels, spec declares {l}")
    n_strings = l**k
    if n_strings > budget:
        raise ValueError(
            f"enumeration of {n_strings} strings exceeds the budget of {budget}"
        )
    probs = q.probs
    mass = np.zeros(l + 1)  # slot l collects ties
    place = l ** np.arange(k, dtype=np.int64)
    for start in range(0, n_strings, _CHUNK):
        ids = np.arange(start, min(start + _CHUNK, n_strings), dtype=np.int64)
        digits = (ids[:, None] // place[None, :]) % l
        counts = np.zeros((ids.size, l), dtype=np.int64)
        rows = np.repeat(np.arange(ids.size), k)
        np.add.at(counts, (rows, digits.ravel()), 1)
        top = counts.max(axis=1)
        strict = (counts == top[:, None]).sum(axis=1) == 1
        winner = np.where(strict, counts.argmax(axis=1), l)
        string_prob = np.prod(probs[digits], axis=1)
        mass += np.bincount(winner, weights=string_prob, minlength=l + 1)
    return EnumerationResult(
        q_correct=float(mass[spec.correct_label]),
        tie_mass=float(mass[l]),
        per_label_mass=mass[:l].copy(),
    )


def knn_reference_predict(train: FeatureDataset, query: np.ndarray, k: int) -> int:
    """Plurality vote over the k nearest training points, reimplemented
    independently of the main engine (full sort, Counter vote).

    Tie-breaks match the documented engine rule: equal distances go to
    the smaller training index; a plurality tie goes to the tied label
    with the smallest summed distance, then the smallest label index.
    """
    features = train.features
    labels = train.labels
    if features.shape[0] == 0:
        raise ValueError("training set is empty")
    if k < 1 or k > features.shape[0]:
        raise ValueError("k must be in [1, N]")
    d = [float(np.sum((row - query) ** 2)) for row in features]
    order = sorted(range(len(d)), key=lambda i: (d[i], i))
    chosen = order[:k]
    votes = Counter(int(labels[i]) for i in chosen)
    best = max(votes.values())
    tied = [lab for lab, v in votes.items() if v == best]
    if len(tied) == 1:
        return tied[0]
    sums = {
        lab: sum(d[i] for i in chosen if int(labels[i]) == lab) for lab in tied
    }
    low = min(sums.values())
    return min(lab for lab, s in sums.items() if s == low)
