"""
Distance measures for every feature kind
"""
from .categorical import CategoricalStats, categorical_distance, fit_categorical_stats
from .measures import cosine_distance, degree_divergence, dtw, vector_distance, wasserstein1
from .registry import (
    DistanceId,
    DistanceMatrix,
    check_applicable,
    distances_to,
    global_top_pairs,
    is_applicable,
    pairwise,
    precompute_matrix,
)
