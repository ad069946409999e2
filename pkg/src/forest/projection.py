"""
Distance-based projections and reference-pair selection strategies.

A projection maps a payload x to P(x) = δ(r, x) - δ(q, x) for a reference
pair (q, r). The identity "distance" is the exception: it projects a numeric
value onto itself, which reproduces axis-parallel Isolation Forest splits.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from ..core.dataset import FeatureColumn
from ..core.errors import DegeneratePairError, DistanceError
from ..distances.categorical import CategoricalStats
from ..distances.registry import POSITIVE_SELF_DISTANCES, DistanceId, DistanceMatrix, distances_to, pairwise


class SelectionStrategy(str, Enum):
    RANDOM = "random"
    GLOBAL = "global"
    LOCAL = "local"
    TWO_STEP = "two_step"


@dataclass(frozen=True, eq=False)
class ReferencePair:
    """
    Reference objects (q, r) defining one dynamic feature.

    q_value and r_value are copies of the payloads so a fitted tree can score
    unseen data without the training set; q_index and r_index record which
    training examples they came from (-1 when unknown).
    """

    feature_id: str
    distance_id: DistanceId
    q_value: Any = None
    r_value: Any = None
    q_index: int = -1
    r_index: int = -1

    def __post_init__(self):
        object.__setattr__(self, "distance_id", DistanceId(self.distance_id))

    @property
    def is_identity(self) -> bool:
        return self.distance_id is DistanceId.IDENTITY

    @classmethod
    def identity(cls, feature_id: str) -> "ReferencePair":
        return cls(feature_id=feature_id, distance_id=DistanceId.IDENTITY)


def _identity_values(values: Any) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    arr = arr.reshape(len(arr), -1) if arr.ndim else arr.reshape(1, 1)
    if arr.shape[1] != 1:
        raise DistanceError(f"identity projection needs numeric values, got dimension {arr.shape[1]}")
    return arr[:, 0]


def project(value: Any, pair: ReferencePair, stats: Optional[CategoricalStats] = None) -> float:
    """
    Project one payload onto the pair's dynamic feature.

    Args:
        value: Payload of the pair's feature
        pair: Reference pair
        stats: Fitted counts, required for categorical distances

    Returns:
        float: δ(r, value) - δ(q, value), or the raw value for identity
    """
    expected = (np.ndarray, list, tuple, float, int) if pair.is_identity or isinstance(pair.q_value, np.ndarray) \
        else type(pair.q_value)
    if not isinstance(value, expected):
        raise DistanceError(f"kind mismatch for column '{pair.feature_id}': got {type(value).__name__}")
    if pair.is_identity:
        return float(_identity_values(np.ravel(value).reshape(1, -1))[0])
    return pairwise(pair.distance_id, pair.r_value, value, stats) - pairwise(pair.distance_id, pair.q_value, value, stats)


def project_column(values: Any, pair: ReferencePair, matrix: Optional[DistanceMatrix] = None,
                   positions: Optional[np.ndarray] = None,
                   stats: Optional[CategoricalStats] = None) -> np.ndarray:
    """
    Project a batch of payloads.

    Args:
        values: Payloads to project ((k, d) matrix for vector kinds)
        pair: Reference pair
        matrix: Precomputed distances; used when both references are candidate rows
        positions: Matrix column of each value (its training index), needed with matrix
        stats: Fitted counts for categorical distances

    Returns:
        np.ndarray: One projection per value, identical with or without the matrix
    """
    if pair.is_identity:
        return _identity_values(values)
    if matrix is not None and positions is not None and matrix.has_row(pair.q_index) and matrix.has_row(pair.r_index):
        positions = np.asarray(positions, dtype=int)
        return matrix.row(pair.r_index)[positions] - matrix.row(pair.q_index)[positions]
    return (distances_to(pair.distance_id, pair.r_value, values, stats)
            - distances_to(pair.distance_id, pair.q_value, values, stats))


def reference_candidates(subsample: Sequence[int], pool: Sequence[int]) -> np.ndarray:
    """Sorted examples that are both in the subsample and in the reference pool."""
    return np.intersect1d(np.asarray(subsample, dtype=int), np.asarray(pool, dtype=int))


def payloads_differ(column: FeatureColumn, matrix: DistanceMatrix, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Elementwise test that examples a[k] and b[k] are told apart by the matrix distance.

    A positive distance is enough except under goodall3, where equal categories
    are also at a positive distance; there the payloads themselves are compared.
    """
    a, b = np.ravel(a), np.ravel(b)
    if matrix.distance_id in POSITIVE_SELF_DISTANCES:
        return np.array([column.values[i] != column.values[j] for i, j in zip(a, b)], dtype=bool)
    return matrix.lookup(a, b) > 0.0


def _accept_pair(column: FeatureColumn, matrix: DistanceMatrix, q: int, r: int) -> ReferencePair:
    if q == r or not payloads_differ(column, matrix, np.array([q]), np.array([r]))[0]:
        raise DegeneratePairError(f"reference pair ({q}, {r}) of column '{column.id}' does not separate: "
                                  "distance zero or equal payloads")
    q_value, r_value = column.values[q], column.values[r]
    if isinstance(q_value, np.ndarray):
        q_value, r_value = q_value.copy(), r_value.copy()
    return ReferencePair(
        feature_id=column.id,
        distance_id=matrix.distance_id,
        q_value=q_value,
        r_value=r_value,
        q_index=int(q),
        r_index=int(r),
    )


def _require_two(candidates: np.ndarray, column: FeatureColumn) -> None:
    if len(candidates) < 2:
        raise DegeneratePairError(f"fewer than two reference candidates for column '{column.id}'")


def select_pair_two_step(subsample: Sequence[int], pool: Sequence[int], column: FeatureColumn,
                         matrix: DistanceMatrix, rng: np.random.Generator) -> ReferencePair:
    """
    Two-step selection: random u, q furthest from u, r furthest from q.

    Args:
        subsample: Training indices reaching the node
        pool: Reference pool of the forest
        column: Feature column the matrix was computed on
        matrix: Candidate-by-example distances of the chosen distance
        rng: Random generator owned by the caller

    Returns:
        ReferencePair: (q, r), ties broken by lowest index

    Raises:
        DegeneratePairError: when fewer than two candidates exist or δ(q, r) = 0
    """
    candidates = reference_candidates(subsample, pool)
    _require_two(candidates, column)
    u = candidates[rng.integers(len(candidates))]
    q = candidates[int(np.argmax(matrix.row(u)[candidates]))]
    r = candidates[int(np.argmax(matrix.row(q)[candidates]))]
    return _accept_pair(column, matrix, int(q), int(r))


def select_pair(strategy: SelectionStrategy, subsample: Sequence[int], pool: Sequence[int],
                column: FeatureColumn, matrix: DistanceMatrix, rng: np.random.Generator,
                global_top_pairs: Optional[List[Tuple[int, int]]] = None) -> ReferencePair:
    """
    Select a reference pair with one of the four strategies.

    random draws two distinct candidates, global draws one of the most distant
    pool pairs computed at fit time, local takes the most distant candidate
    pair, two_step delegates to select_pair_two_step.
    """
    strategy = SelectionStrategy(strategy)
    if strategy is SelectionStrategy.TWO_STEP:
        return select_pair_two_step(subsample, pool, column, matrix, rng)

    if strategy is SelectionStrategy.GLOBAL:
        if not global_top_pairs:
            raise DegeneratePairError(f"no distant pool pairs recorded for column '{column.id}'")
        q, r = global_top_pairs[rng.integers(len(global_top_pairs))]
        return _accept_pair(column, matrix, q, r)

    candidates = reference_candidates(subsample, pool)
    _require_two(candidates, column)
    if strategy is SelectionStrategy.RANDOM:
        q, r = rng.choice(candidates, size=2, replace=False)
        return _accept_pair(column, matrix, int(q), int(r))

    among = np.vstack([matrix.row(c)[candidates] for c in candidates])
    np.fill_diagonal(among, -np.inf)
    i, j = np.unravel_index(int(np.argmax(among)), among.shape)
    return _accept_pair(column, matrix, int(candidates[i]), int(candidates[j]))
