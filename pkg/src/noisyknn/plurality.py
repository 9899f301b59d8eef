"""Analytic accuracy of a plurality vote over a noisy label distribution.

The central quantity is Q: the probability that, among K labels drawn
i.i.d. from a distribution q, the correct label is the strict plurality
winner.  Ties count as incorrect.  The fast evaluation restricts the sum
over label-count tuples to exactly the winning region via per-label
lower/upper bounds, and shares partial sums through dynamic programming.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional

import numpy as np
from scipy.special import gammaln

from ._kernels import plurality_kernel

PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class LabelDistribution:
    """Probability vector over class labels."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty 1-D vector")
        if np.any(p < 0):
            raise ValueError("probabilities must be non-negative")
        total = float(p.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "probs", p)

    def __len__(self) -> int:
        return self.probs.size

    @classmethod
    def point_mass(cls, num_labels: int, label: int) -> "LabelDistribution":
        p = np.zeros(num_labels)
        p[label] = 1.0
        return cls(p)


@dataclass(frozen=True)
class CorruptionMatrix:
    """Row-stochastic matrix; entry (k, j) is the probability that a
    corrupted sample with clean label k receives label j."""

    rows: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.rows, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError("corruption matrix must be square and non-empty")
        if np.any(m < 0):
            raise ValueError("corruption matrix entries must be non-negative")
        sums = m.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > PROB_SUM_TOL)[0]
        if bad.size:
            raise ValueError(
                f"corruption matrix row {bad[0]} sums to {sums[bad[0]]!r}, expected 1"
            )
        object.__setattr__(self, "rows", m)

    @property
    def num_labels(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Size-K neighborhood over num_labels classes with a designated
    correct label."""

    k: int
    num_labels: int
    correct_label: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.num_labels < 1:
            raise ValueError("num_labels must be >= 1")
        if not 0 <= self.correct_label < self.num_labels:
            raise ValueError("correct_label out of range")


@dataclass(frozen=True)
class SummationBounds:
    """Bounds on the repeat count of one label in the winning-region sum.

    ``remaining`` is the number of unassigned slots before this label;
    ``cap`` is one less than the winner's count (None at index 1, where
    the winner's count is being chosen).
    """

    lower: int
    upper: int
    remaining: int
    cap: Optional[int]


def noisy_distribution(
    clean: LabelDistribution, gamma: float, matrix: CorruptionMatrix
) -> LabelDistribution:
    """Mix a clean neighborhood label distribution with the corruption
    process: each sample either keeps its clean label (prob 1-gamma) or
    is corrupted through the matrix row of its clean label (prob gamma).
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma!r}")
    if matrix.num_labels != len(clean):
        raise ValueError(
            f"matrix is {matrix.num_labels}x{matrix.num_labels} but the "
            f"distribution has {len(clean)} labels"
        )
    c = clean.probs
    q = (1.0 - gamma) * c + gamma * (c @ matrix.rows)
    return LabelDistribution(q)


def summation_bounds(
    spec: NeighborhoodSpec, prefix: tuple[int, ...] = ()
) -> SummationBounds:
    """Repeat-count bounds for the next label after ``prefix``.

    The convention puts the correct label first, so an empty prefix asks
    for the winner's bounds.  Bounds are tight: every in-range choice can
    be completed to a tuple summing to K with the first entry strictly
    largest.
    """
    k, l = spec.k, spec.num_labels
    if not prefix:
        lower = -(-(k + l - 1) // l)  # ceil((K + L - 1) / L)
        return SummationBounds(lower=lower, upper=k, remaining=k, cap=None)
    i = len(prefix) + 1  # 1-based index of the label being bounded
    if i > l:
        raise ValueError("prefix already covers every label")
    remaining = k - sum(prefix)
    cap = prefix[0] - 1
    upper = min(remaining, cap)
    lower = max(0, remaining - (l - i) * cap)
    return SummationBounds(lower=lower, upper=upper, remaining=remaining, cap=cap)


def admissible_tuples(spec: NeighborhoodSpec) -> Iterator[tuple[int, ...]]:
    """All label-count tuples visited by the bounded nested summation,
    correct label first.  Exactly the tuples with sum K whose first entry
    is the strict maximum."""

    def rec(prefix: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if len(prefix) == spec.num_labels:
            yield prefix
            return
        b = summation_bounds(spec, prefix)
        for n in range(b.lower, b.upper + 1):
            yield from rec(prefix + (n,))

    yield from rec(())


@lru_cache(maxsize=32)
def _log_factorials(k: int) -> np.ndarray:
    return gammaln(np.arange(k + 1, dtype=np.float64) + 1.0)


@lru_cache(maxsize=32)
def _binomial_tables(k: int) -> tuple[np.ndarray, np.ndarray]:
    """(log C(r, n), C(r, n)) for 0 <= n <= r <= k; invalid cells are
    -inf / 0."""
    lf = _log_factorials(k)
    logc = np.full((k + 1, k + 1), -np.inf)
    for rr in range(k + 1):
        n = np.arange(rr + 1)
        logc[rr, : rr + 1] = lf[rr] - lf[n] - lf[rr - n]
    c = np.exp(logc)
    c[np.isneginf(logc)] = 0.0
    logc.setflags(write=False)
    c.setflags(write=False)
    return logc, c


def _reordered_q(spec: NeighborhoodSpec, q: LabelDistribution) -> np.ndarray:
    if len(q) != spec.num_labels:
        raise ValueError(
            f"q has {len(q)} labels but the neighborhood declares {spec.num_labels}"
        )
    p = q.probs
    c = spec.correct_label
    return np.concatenate(([p[c]], np.delete(p, c)))


def plurality_accuracy(spec: NeighborhoodSpec, q: LabelDistribution) -> float:
    """Probability that the correct label strictly wins the plurality
    vote among K i.i.d. draws from q.

    Evaluated with the bounded nested summation: per-term magnitudes are
    assembled in log space (log-gamma binomials) and the suffix over the
    non-correct labels is shared through a DP keyed by (label index,
    slots remaining, winner cap).
    """
    qr = _reordered_q(spec, q)
    if spec.num_labels == 1:
        return 1.0
    logc, c = _binomial_tables(spec.k)
    return float(plurality_kernel(qr, spec.k, logc, c))


def plurality_accuracy_naive(spec: NeighborhoodSpec, q: LabelDistribution) -> float:
    """Bounds-respecting nested loop without memoization; reference path
    for small K."""
    qr = _reordered_q(spec, q)
    if spec.num_labels == 1:
        return 1.0
    lf = _log_factorials(spec.k)
    logq = np.where(qr > 0, np.log(np.where(qr > 0, qr, 1.0)), -np.inf)
    terms = []
    for counts in admissible_tuples(spec):
        logt = lf[spec.k]
        ok = True
        for n, lq in zip(counts, logq):
            logt -= lf[n]
            if n > 0:
                if np.isneginf(lq):
                    ok = False
                    break
                logt += n * lq
        if ok:
            terms.append(math.exp(logt))
    return math.fsum(terms)


def flip_accuracy_simplified(k: int, gamma: float) -> float:
    """Closed-form accuracy for flip noise on a perfectly learnable
    dataset: the chance that uncorrupted samples hold a strict majority
    of the K neighbors."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma!r}")
    logc, _ = _binomial_tables(k)
    p, g = 1.0 - gamma, gamma
    terms = []
    for n in range(-(-(k + 1) // 2), k + 1):
        if (p == 0.0 and n > 0) or (g == 0.0 and n < k):
            continue
        logt = logc[k, n]
        if n > 0:
            logt += n * math.log(p)
        if n < k:
            logt += (k - n) * math.log(g)
        terms.append(math.exp(logt))
    return math.fsum(terms)


def uniform_q_simplified(l: int, gamma: float) -> LabelDistribution:
    """Noisy neighborhood distribution for uniform noise on a perfectly
    learnable dataset; the correct label sits at index 0."""
    if l < 1:
        raise ValueError("l must be >= 1")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma!r}")
    q = np.full(l, gamma / l)
    q[0] += 1.0 - gamma
    return LabelDistribution(q)


def concentrated_accuracy(gamma: float) -> float:
    """Expected accuracy under locally concentrated noise: the fraction
    of test samples whose neighborhood lies in the clean region."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma!r}")
    return 1.0 - gamma
