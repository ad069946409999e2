"""
Registry of distance measures and precomputed candidate-by-example matrices.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from ..core.dataset import Dataset, FeatureKind
from ..core.errors import DistanceError
from .categorical import CATEGORICAL_KINDS, CategoricalStats, categorical_distances
from .measures import (
    MINKOWSKI_KINDS,
    cosine_distances,
    degree_divergences,
    dtw_distances,
    minkowski_distances,
    wasserstein_distances,
)

logger = logging.getLogger(__name__)


class DistanceId(str, Enum):
    EUCLIDEAN = "euclidean"
    MANHATTAN = "manhattan"
    CHEBYSHEV = "chebyshev"
    COSINE = "cosine"
    GOODALL3 = "goodall3"
    LIN = "lin"
    OF = "of"
    WASSERSTEIN1 = "wasserstein1"
    DTW = "dtw"
    DEGREE_DIVERGENCE = "degree_divergence"
    IDENTITY = "identity"


_VECTOR_KINDS = frozenset({FeatureKind.NUMERIC, FeatureKind.VECTOR})

APPLICABLE_KINDS: Dict[DistanceId, FrozenSet[FeatureKind]] = {
    DistanceId.EUCLIDEAN: _VECTOR_KINDS,
    DistanceId.MANHATTAN: _VECTOR_KINDS,
    DistanceId.CHEBYSHEV: _VECTOR_KINDS,
    DistanceId.COSINE: _VECTOR_KINDS,
    DistanceId.GOODALL3: frozenset({FeatureKind.CATEGORICAL}),
    DistanceId.LIN: frozenset({FeatureKind.CATEGORICAL}),
    DistanceId.OF: frozenset({FeatureKind.CATEGORICAL}),
    DistanceId.WASSERSTEIN1: frozenset({FeatureKind.HISTOGRAM}),
    DistanceId.DTW: frozenset({FeatureKind.TIMESERIES}),
    DistanceId.DEGREE_DIVERGENCE: frozenset({FeatureKind.GRAPH}),
    DistanceId.IDENTITY: frozenset({FeatureKind.NUMERIC}),
}

# Distances satisfying the triangle inequality
METRIC_DISTANCES = frozenset({
    DistanceId.EUCLIDEAN, DistanceId.MANHATTAN, DistanceId.CHEBYSHEV, DistanceId.WASSERSTEIN1,
})

# Distances with δ(x, x) > 0; a positive distance does not mean the payloads differ
POSITIVE_SELF_DISTANCES = frozenset({DistanceId.GOODALL3})


def is_applicable(distance_id: str, kind: FeatureKind) -> bool:
    return FeatureKind(kind) in APPLICABLE_KINDS[DistanceId(distance_id)]


def check_applicable(distance_id: str, kind: FeatureKind, feature_id: str = "?") -> DistanceId:
    """
    Resolve a distance tag and make sure it fits the feature's kind.

    Raises:
        DistanceError: for unknown tags or inapplicable kind pairings
    """
    try:
        did = DistanceId(distance_id)
    except ValueError as e:
        raise DistanceError(f"unknown distance '{distance_id}' for column '{feature_id}'") from e
    kind = FeatureKind(kind)
    if kind not in APPLICABLE_KINDS[did]:
        raise DistanceError(f"distance not applicable: '{did.value}' cannot be used on {kind.value} column '{feature_id}'")
    return did


def distances_to(distance_id: str, reference: Any, values: Any,
                 stats: Optional[CategoricalStats] = None) -> np.ndarray:
    """
    Distances from one reference payload to a batch of payloads.

    Args:
        distance_id: Pairwise distance tag (identity is rejected)
        reference: Reference payload
        values: (k, d) float matrix for vector kinds, sequence of payloads otherwise
        stats: Fitted counts, required by categorical distances

    Returns:
        np.ndarray: k distances
    """
    did = DistanceId(distance_id)
    if did is DistanceId.IDENTITY:
        raise DistanceError("identity is a projection, not a pairwise distance")
    if did.value in MINKOWSKI_KINDS:
        return minkowski_distances(did.value, reference, values)
    if did is DistanceId.COSINE:
        return cosine_distances(reference, values)
    if did.value in CATEGORICAL_KINDS:
        if stats is None:
            raise DistanceError(f"'{did.value}' needs fitted categorical statistics")
        return categorical_distances(did.value, stats, reference, values)
    if did is DistanceId.WASSERSTEIN1:
        return wasserstein_distances(reference, values)
    if did is DistanceId.DTW:
        return dtw_distances(reference, values)
    return degree_divergences(reference, values)


def pairwise(distance_id: str, x: Any, y: Any, stats: Optional[CategoricalStats] = None) -> float:
    """δ(x, y) for a single pair, evaluated as a one-element batch."""
    if isinstance(x, np.ndarray) and x.dtype != object:
        batch = np.asarray(y, dtype=float).reshape(1, -1)
    else:
        batch = np.empty(1, dtype=object)
        batch[0] = y
    return float(distances_to(distance_id, x, batch, stats)[0])


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """
    Distances from m candidate examples (rows) to all n examples (columns).

    entries[i, j] = δ(value[candidate_rows[i]], value[j]).
    """

    feature_id: str
    distance_id: DistanceId
    candidate_rows: np.ndarray
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "_row_of", {int(idx): i for i, idx in enumerate(self.candidate_rows)})

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    def has_row(self, index: int) -> bool:
        return int(index) in self._row_of

    def row(self, index: int) -> np.ndarray:
        """All n distances from candidate example `index`."""
        try:
            return self.entries[self._row_of[int(index)]]
        except KeyError as e:
            raise DistanceError(f"example {index} is not a candidate row of the '{self.feature_id}' matrix") from e

    def lookup(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Elementwise δ(a[k], b[k]) where every a[k] is a candidate row."""
        rows = np.array([self._row_of[int(i)] for i in np.ravel(a)], dtype=int)
        return self.entries[rows, np.ravel(b)]


def precompute_matrix(dataset: Dataset, feature_id: str, distance_id: str, candidate_indices: Sequence[int],
                      stats: Optional[CategoricalStats] = None, n_jobs: int = 1) -> DistanceMatrix:
    """
    Precompute the m x n distance matrix for one feature and distance.

    Args:
        dataset: Training data
        feature_id: Column to measure
        distance_id: Pairwise distance applicable to the column's kind
        candidate_indices: m example indices allowed as reference objects
        stats: Fitted counts for categorical distances
        n_jobs: Worker threads; rows are independent

    Returns:
        DistanceMatrix: Matrix whose entries match pointwise calls exactly
    """
    column = dataset.column(feature_id)
    did = check_applicable(distance_id, column.kind, feature_id)
    if did is DistanceId.IDENTITY:
        raise DistanceError("identity is a projection, not a pairwise distance")
    candidates = np.asarray(candidate_indices, dtype=int)
    if candidates.size and (candidates.min() < 0 or candidates.max() >= dataset.n):
        raise DistanceError(f"candidate indices must lie in [0, {dataset.n})")

    rows = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(distances_to)(did, column.values[c], column.values, stats) for c in candidates
    )
    entries = np.vstack(rows) if rows else np.empty((0, dataset.n), dtype=float)
    logger.debug(f"Precomputed {entries.shape[0]}x{entries.shape[1]} '{did.value}' matrix for column '{feature_id}'")
    return DistanceMatrix(feature_id=feature_id, distance_id=did, candidate_rows=candidates, entries=entries)


def global_top_pairs(matrix: DistanceMatrix, k: int = 10) -> List[Tuple[int, int]]:
    """
    Most distant pairs among the matrix's own candidate rows.

    Args:
        matrix: Candidate-by-example distance matrix
        k: Number of pairs to keep

    Returns:
        List[Tuple[int, int]]: Up to k example-index pairs with positive distance,
        most distant first; ties keep row-major order
    """
    candidates = matrix.candidate_rows
    among = matrix.entries[:, candidates]
    upper_i, upper_j = np.triu_indices(len(candidates), 1)
    dist = among[upper_i, upper_j]
    order = np.argsort(-dist, kind="stable")
    pairs = []
    for pos in order[:k]:
        if dist[pos] <= 0.0:
            break
        pairs.append((int(candidates[upper_i[pos]]), int(candidates[upper_j[pos]])))
    return pairs
