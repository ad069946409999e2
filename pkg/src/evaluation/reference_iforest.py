"""
Classic axis-parallel Isolation Forest on a numeric matrix.

Used as the baseline the identity-only forest is compared against. Trees use
the same seeding, subsampling, depth limit and path-length normalisation as
the similarity forest.
"""
import logging
from typing import Optional, Tuple, Union

import numpy as np

from ..core import config
from ..core.errors import ConfigError
from ..forest.scoring import anomaly_score, avg_path_c
from ..forest.tree import random_threshold

logger = logging.getLogger(__name__)

# (feature, threshold, left, right) or leaf (size, depth)
Node = Union[Tuple[int, float, "Node", "Node"], Tuple[int, int]]


class ReferenceIsolationForest:
    """
    Isolation Forest with random feature and uniform threshold splits.
    """

    def __init__(self, t: int = config.DEFAULT_TREES, psi: int = config.DEFAULT_SUBSAMPLE_SIZE,
                 seed: int = config.DEFAULT_SEED):
        """
        Initialize the forest.

        Args:
            t: Number of trees
            psi: Subsample size per tree
            seed: Random seed
        """
        if t < 1 or psi < 2:
            raise ConfigError(f"need t >= 1 and psi >= 2, got t={t}, psi={psi}")
        self.t = t
        self.psi = psi
        self.seed = seed
        self.trees = []
        self.c_norm: Optional[float] = None

    def fit(self, X: np.ndarray) -> "ReferenceIsolationForest":
        X = np.asarray(X, dtype=float)
        n = X.shape[0]
        psi_eff = min(self.psi, n)
        max_depth = (psi_eff - 1).bit_length()
        self.trees = []
        for i in range(self.t):
            rng = np.random.default_rng([self.seed, 1, i])
            rows = np.sort(rng.choice(n, size=psi_eff, replace=False))
            self.trees.append(self._grow(X, rows, 0, max_depth, rng))
        self.c_norm = avg_path_c(psi_eff)
        logger.debug(f"Fitted reference Isolation Forest: t={self.t}, psi_eff={psi_eff}")
        return self

    def _grow(self, X: np.ndarray, rows: np.ndarray, depth: int, max_depth: int,
              rng: np.random.Generator) -> Node:
        if depth >= max_depth or len(rows) <= 1:
            return (len(rows), depth)
        block = X[rows]
        splittable = np.flatnonzero(block.max(axis=0) > block.min(axis=0))
        if not splittable.size:
            return (len(rows), depth)
        feature = int(splittable[rng.integers(len(splittable))])
        threshold = random_threshold(block[:, feature], rng)
        goes_left = block[:, feature] <= threshold
        return (feature, float(threshold),
                self._grow(X, rows[goes_left], depth + 1, max_depth, rng),
                self._grow(X, rows[~goes_left], depth + 1, max_depth, rng))

    @staticmethod
    def _path_length(x: np.ndarray, node: Node) -> float:
        while len(node) == 4:
            feature, threshold, left, right = node
            node = left if x[feature] <= threshold else right
        size, depth = node
        return depth + avg_path_c(size)

    def score(self, X: np.ndarray) -> np.ndarray:
        """
        Anomaly scores 2^(-E/c) of every row.

        Returns:
            np.ndarray: Scores in (0, 1]
        """
        if self.c_norm is None:
            raise ConfigError("ReferenceIsolationForest.score called before fit")
        X = np.asarray(X, dtype=float)
        total = np.zeros(X.shape[0], dtype=float)
        for tree in self.trees:
            total += np.array([self._path_length(x, tree) for x in X])
        return anomaly_score(total / len(self.trees), self.c_norm)
