"""Feature-embedding dataset container shared by the K-NN engine, the
noise injectors, and the curve drivers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FeatureDataset:
    """N x D feature matrix with integer labels in [0, num_labels)."""

    features: np.ndarray
    labels: np.ndarray
    num_labels: int

    def __post_init__(self):
        f = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if f.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if y.ndim != 1 or y.shape[0] != f.shape[0]:
            raise ValueError("labels must be one integer per feature row")
        if not np.all(np.isfinite(f)):
            raise ValueError("features contain non-finite values")
        if self.num_labels < 1:
            raise ValueError("num_labels must be >= 1")
        if y.size and (y.min() < 0 or y.max() >= self.num_labels):
            raise ValueError("labels out of range")
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "labels", y)

    def __len__(self) -> int:
        return self.features.shape[0]

    def with_labels(self, labels: np.ndarray) -> "FeatureDataset":
        return FeatureDataset(self.features, labels, self.num_labels)
