"""Analytic and empirical K-nearest-neighbor accuracy under label noise."""

from .dataset import FeatureDataset
from .plurality import (
    CorruptionMatrix,
    LabelDistribution,
    NeighborhoodSpec,
    SummationBounds,
    concentrated_accuracy,
    flip_accuracy_simplified,
    noisy_distribution,
    plurality_accuracy,
    plurality_accuracy_naive,
    summation_bounds,
    uniform_q_simplified,
)
from .noise import (
    InjectionReport,
    NoiseSpec,
    build_matrix,
    cyclic_flip_map,
    inject_concentrated_noise,
    inject_random_noise,
    kmeans,
    mix_seed,
)
from .knn import (
    NeighborHistogram,
    chi_square_distance,
    clean_distribution,
    empirical_accuracy,
    neighbors,
    predict,
    preferred_k,
)
from .curves import AccuracyCurve, analytic_curve, concentrated_curve, empirical_curve
from .oracle import EnumerationResult, enumerate_accuracy, knn_reference_predict

__all__ = [
    "AccuracyCurve",
    "CorruptionMatrix",
    "EnumerationResult",
    "FeatureDataset",
    "InjectionReport",
    "LabelDistribution",
    "NeighborHistogram",
    "NeighborhoodSpec",
    "NoiseSpec",
    "SummationBounds",
    "analytic_curve",
    "build_matrix",
    "chi_square_distance",
    "clean_distribution",
    "concentrated_accuracy",
    "concentrated_curve",
    "cyclic_flip_map",
    "empirical_accuracy",
    "empirical_curve",
    "enumerate_accuracy",
    "flip_accuracy_simplified",
    "inject_concentrated_noise",
    "inject_random_noise",
    "kmeans",
    "knn_reference_predict",
    "mix_seed",
    "neighbors",
    "noisy_distribution",
    "plurality_accuracy",
    "plurality_accuracy_naive",
    "predict",
    "preferred_k",
    "summation_bounds",
    "uniform_q_simplified",
]

__version__ = "0.1.0"
