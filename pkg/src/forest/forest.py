"""
Random Similarity Isolation Forest: fitting, scoring and prediction.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from ..core import config as settings
from ..core.dataset import Dataset, FeatureKind, validate
from ..core.errors import ConfigError, DatasetError, ModelFormatError
from ..distances.categorical import CategoricalStats, fit_categorical_stats
from ..distances.registry import DistanceId, distances_to, global_top_pairs, precompute_matrix
from .params import FitParams
from .projection import ReferencePair, SelectionStrategy
from .scoring import anomaly_score, avg_path_c
from .tree import RSITree, SplitContext, build_tree, path_length, path_lengths

logger = logging.getLogger(__name__)

SchemaEntry = Tuple[str, FeatureKind, Optional[int]]


@dataclass(frozen=True, eq=False)
class RSIFModel:
    """
    Fitted forest.

    Self-contained: reference payloads live in the trees and categorical
    counts in `stats`, so scoring never needs the training data.

    Args:
        trees: The t fitted trees
        params: Hyperparameters used for the fit
        psi_eff: Effective subsample size min(psi, n)
        c_norm: c(psi_eff), the score normaliser
        pool_size: Number of examples in the reference pool
        n_train: Training set size
        schema: (id, kind, dim) of every configured feature
        stats: Categorical counts per categorical feature
        theta: Optional default decision threshold
    """

    trees: Tuple[RSITree, ...]
    params: FitParams
    psi_eff: int
    c_norm: float
    pool_size: int
    n_train: int
    schema: Tuple[SchemaEntry, ...]
    stats: Dict[str, CategoricalStats] = field(default_factory=dict)
    theta: Optional[float] = None

    @property
    def kinds(self) -> Dict[str, FeatureKind]:
        return {feature_id: kind for feature_id, kind, _ in self.schema}

    def with_theta(self, theta: Optional[float]) -> "RSIFModel":
        return RSIFModel(
            trees=self.trees, params=self.params, psi_eff=self.psi_eff, c_norm=self.c_norm,
            pool_size=self.pool_size, n_train=self.n_train, schema=self.schema, stats=self.stats,
            theta=None if theta is None else float(theta),
        )

    def score(self, example: Mapping[str, Any]) -> float:
        return score(self, example)

    def score_batch(self, dataset: Dataset, n_jobs: int = 1) -> np.ndarray:
        return score_batch(self, dataset, n_jobs=n_jobs)

    def predict(self, dataset: Dataset, theta: Optional[float] = None, n_jobs: int = 1) -> np.ndarray:
        return predict(self, dataset, theta=theta, n_jobs=n_jobs)

    def to_json(self) -> Dict[str, Any]:
        kinds = self.kinds
        return {
            "format": settings.MODEL_FORMAT,
            "version": settings.MODEL_FORMAT_VERSION,
            "params": self.params.to_json(),
            "psi_eff": self.psi_eff,
            "c_norm": self.c_norm,
            "pool_size": self.pool_size,
            "n_train": self.n_train,
            "theta": self.theta,
            "schema": [{"id": fid, "kind": kind.value, "dim": dim} for fid, kind, dim in self.schema],
            "categorical_stats": {fid: stats.to_json() for fid, stats in self.stats.items()},
            "trees": [tree.to_json(kinds) for tree in self.trees],
        }

    @classmethod
    def from_json(cls, obj: Any) -> "RSIFModel":
        if not isinstance(obj, Mapping) or obj.get("format") != settings.MODEL_FORMAT:
            raise ModelFormatError("corrupt model: not an rsif-model document")
        version = obj.get("version")
        if version != settings.MODEL_FORMAT_VERSION:
            raise ModelFormatError(f"unsupported version: {version!r} (expected {settings.MODEL_FORMAT_VERSION})")
        try:
            schema = tuple(
                (entry["id"], FeatureKind(entry["kind"]), None if entry["dim"] is None else int(entry["dim"]))
                for entry in obj["schema"]
            )
            kinds = {fid: kind for fid, kind, _ in schema}
            theta = obj.get("theta")
            return cls(
                trees=tuple(RSITree.from_json(tree, kinds) for tree in obj["trees"]),
                params=FitParams.from_json(obj["params"]),
                psi_eff=int(obj["psi_eff"]),
                c_norm=float(obj["c_norm"]),
                pool_size=int(obj["pool_size"]),
                n_train=int(obj["n_train"]),
                schema=schema,
                stats={fid: CategoricalStats.from_json(s) for fid, s in obj["categorical_stats"].items()},
                theta=None if theta is None else float(theta),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ModelFormatError(f"corrupt model: {e}") from e


def _pool_size(m: float, n: int) -> int:
    # round first so 0.7 * 10 does not become 8
    return min(n, math.ceil(round(m * n, 9)))


def _fit_tree(index: int, n: int, psi_eff: int, max_depth: int, params: FitParams,
              context: SplitContext) -> RSITree:
    rng = np.random.default_rng([params.seed, 1, index])
    subsample = np.sort(rng.choice(n, size=psi_eff, replace=False))
    return build_tree(subsample, params.config, params.strategy, max_depth, rng, context)


def fit(dataset: Dataset, params: FitParams, n_jobs: int = 1) -> RSIFModel:
    """
    Fit a forest.

    Args:
        dataset: Training data (labels are ignored)
        params: Hyperparameters and distance configuration
        n_jobs: Worker threads for matrix precomputation and tree building;
            the fitted model does not depend on it

    Returns:
        RSIFModel: Fitted model

    Raises:
        DatasetError: on an invalid dataset or fewer than two examples
        ConfigError: on an empty or inapplicable distance configuration
    """
    started = time.perf_counter()
    violations = validate(dataset)
    if violations:
        raise DatasetError(f"invalid dataset: {violations[0]}")
    n = dataset.n
    if n < 2:
        raise DatasetError(f"need at least 2 examples to fit, got {n}")
    params.config.validate(dataset)

    pool_rng = np.random.default_rng([params.seed, 0])
    pool = np.sort(pool_rng.choice(n, size=_pool_size(params.m, n), replace=False))

    active = params.config.active_features
    stats = {
        feature_id: fit_categorical_stats(dataset.column(feature_id).values)
        for feature_id in active
        if dataset.column(feature_id).kind is FeatureKind.CATEGORICAL
    }

    matrices = {}
    for feature_id in active:
        for distance_id in dict.fromkeys(params.config.distances_for(feature_id)):
            if distance_id is DistanceId.IDENTITY:
                continue
            matrices[(feature_id, distance_id)] = precompute_matrix(
                dataset, feature_id, distance_id, pool, stats.get(feature_id), n_jobs=n_jobs,
            )
    global_pairs = {}
    if params.strategy is SelectionStrategy.GLOBAL:
        global_pairs = {key: global_top_pairs(matrix, settings.GLOBAL_TOP_PAIRS) for key, matrix in matrices.items()}

    context = SplitContext(dataset=dataset, pool=pool, matrices=matrices, stats=stats, global_pairs=global_pairs)
    psi_eff = min(params.psi, n)
    max_depth = (psi_eff - 1).bit_length()
    trees = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_fit_tree)(i, n, psi_eff, max_depth, params, context) for i in range(params.t)
    )

    schema = tuple(entry for entry in dataset.schema() if entry[0] in active)
    model = RSIFModel(
        trees=tuple(trees),
        params=params,
        psi_eff=psi_eff,
        c_norm=avg_path_c(psi_eff),
        pool_size=len(pool),
        n_train=n,
        schema=schema,
        stats=stats,
    )
    logger.info(f"Fitted {params.t} trees on {n} examples (psi_eff={psi_eff}, pool={len(pool)}, "
                f"strategy={params.strategy.value}) in {time.perf_counter() - started:.2f}s")
    return model


def check_schema(model: RSIFModel, dataset: Dataset) -> None:
    """
    Ensure a dataset carries every feature the model was fitted on.

    Raises:
        DatasetError: naming the first missing or mismatched column
    """
    present = {fid: (kind, dim) for fid, kind, dim in dataset.schema()}
    for feature_id, kind, dim in model.schema:
        if feature_id not in present:
            raise DatasetError(f"schema mismatch: column '{feature_id}' is missing")
        got_kind, got_dim = present[feature_id]
        if got_kind is not kind or got_dim != dim:
            got = got_kind.value if got_dim is None else f"{got_kind.value}[{got_dim}]"
            want = kind.value if dim is None else f"{kind.value}[{dim}]"
            raise DatasetError(f"schema mismatch: column '{feature_id}' is {got}, model expects {want}")


def score(model: RSIFModel, example: Mapping[str, Any]) -> float:
    """
    Anomaly score of one example, s = 2^(-E/c(psi_eff)).

    Args:
        model: Fitted model
        example: Payloads keyed by feature id

    Returns:
        float: Score in (0, 1]; higher is more anomalous
    """
    for feature_id, _, _ in model.schema:
        if feature_id not in example:
            raise DatasetError(f"schema mismatch: example has no column '{feature_id}'")
    total = 0.0
    for tree in model.trees:
        total += path_length(tree, example, model.stats)
    return anomaly_score(total / len(model.trees), model.c_norm)


class _ReferenceDistances:
    """
    Distances from every reference payload of a model to every row of a batch.

    Keys are (feature, distance, training index); payloads without a training
    index are keyed by object identity.
    """

    def __init__(self, model: RSIFModel, dataset: Dataset, n_jobs: int = 1):
        self.dataset = dataset
        self.stats = model.stats
        pending: Dict[Tuple[Any, ...], Tuple[ReferencePair, Any]] = {}
        for tree in model.trees:
            for node in tree.internal_nodes():
                pair = node.pair
                if pair.is_identity:
                    continue
                for index, value in ((pair.q_index, pair.q_value), (pair.r_index, pair.r_value)):
                    pending.setdefault(self._key(pair, index, value), (pair, value))
        keys = list(pending)
        distances = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(self._distances)(*pending[key]) for key in keys
        )
        self.cache: Dict[Tuple[Any, ...], np.ndarray] = dict(zip(keys, distances))
        logger.debug(f"Cached distances from {len(keys)} reference objects to {dataset.n} examples")

    @staticmethod
    def _key(pair: ReferencePair, index: int, value: Any) -> Tuple[Any, ...]:
        if index >= 0:
            return pair.feature_id, pair.distance_id, index
        return pair.feature_id, pair.distance_id, "object", id(value)

    def _distances(self, pair: ReferencePair, value: Any) -> np.ndarray:
        column = self.dataset.column(pair.feature_id)
        return distances_to(pair.distance_id, value, column.values, self.stats.get(pair.feature_id))

    def project_rows(self, pair: ReferencePair, rows: np.ndarray) -> np.ndarray:
        if pair.is_identity:
            return self.dataset.column(pair.feature_id).values[rows, 0]
        to_r = self.cache[self._key(pair, pair.r_index, pair.r_value)]
        to_q = self.cache[self._key(pair, pair.q_index, pair.q_value)]
        return to_r[rows] - to_q[rows]


def score_batch(model: RSIFModel, dataset: Dataset, n_jobs: int = 1) -> np.ndarray:
    """
    Scores of every example of a dataset.

    Bitwise equal to calling score() row by row, for any n_jobs.

    Args:
        model: Fitted model
        dataset: Data with the model's feature schema
        n_jobs: Worker threads

    Returns:
        np.ndarray: One score per example
    """
    check_schema(model, dataset)
    n = dataset.n
    if n == 0:
        return np.empty(0, dtype=float)
    references = _ReferenceDistances(model, dataset, n_jobs=n_jobs)
    per_tree: List[np.ndarray] = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(path_lengths)(tree, references.project_rows, n) for tree in model.trees
    )
    total = np.zeros(n, dtype=float)
    for lengths in per_tree:
        total += lengths
    return anomaly_score(total / len(model.trees), model.c_norm)


def predict(model: RSIFModel, dataset: Dataset, theta: Optional[float] = None, n_jobs: int = 1) -> np.ndarray:
    """
    Binary outlier labels, 1 where score >= theta.

    Args:
        model: Fitted model
        dataset: Data to label
        theta: Decision threshold; falls back to the model's own theta

    Returns:
        np.ndarray: 0/1 labels
    """
    if theta is None:
        theta = model.theta
    if theta is None:
        raise ConfigError("no decision threshold: pass theta or fit with one")
    return (score_batch(model, dataset, n_jobs=n_jobs) >= theta).astype(int)
