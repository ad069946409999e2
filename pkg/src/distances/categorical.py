"""
Frequency-based similarity measures for categorical features.

Single-attribute forms of the Goodall3, Lin and occurrence-frequency (OF)
measures, with p(a) = f(a) / n and p2(a) = f(a)(f(a) - 1) / (n(n - 1)):

    Goodall3: sim = 1 - p2(x) if x == y, else 0
    Lin:      sim = 1 if x == y, else 2 ln(p(x) + p(y)) / (ln p(x) + ln p(y)), clamped to [0, 1]
    OF:       sim = 1 if x == y, else 1 / (1 + ln(n / f(x)) ln(n / f(y)))

Distances are 1 - sim. Categories never seen during fitting count as 1.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Any, Dict, Sequence

import numpy as np

from ..core.errors import DistanceError

logger = logging.getLogger(__name__)

CATEGORICAL_KINDS = ("goodall3", "lin", "of")


@dataclass(frozen=True)
class CategoricalStats:
    """Category occurrence counts fitted on a training column."""

    n_train: int
    freq: Dict[str, int]

    def count(self, category: str) -> int:
        return self.freq.get(category, 1)

    def to_json(self) -> Dict[str, Any]:
        return {"n_train": self.n_train, "freq": dict(self.freq)}

    @classmethod
    def from_json(cls, obj: Dict[str, Any]) -> "CategoricalStats":
        return cls(n_train=int(obj["n_train"]), freq={str(k): int(v) for k, v in obj["freq"].items()})


def fit_categorical_stats(column: Sequence[str]) -> CategoricalStats:
    """
    Count category occurrences in a training column.

    Args:
        column: Categorical training values

    Returns:
        CategoricalStats: n_train and per-category counts
    """
    counts = Counter(str(value) for value in column)
    if not counts:
        raise DistanceError("cannot fit categorical statistics on an empty column")
    logger.debug(f"Fitted categorical statistics: {sum(counts.values())} values, {len(counts)} categories")
    return CategoricalStats(n_train=sum(counts.values()), freq=dict(sorted(counts.items())))


def categorical_distances(kind: str, stats: CategoricalStats, x: str, values: Sequence[str]) -> np.ndarray:
    """
    Distances in [0, 1] from category x to every category in values.

    Args:
        kind: "goodall3", "lin" or "of"
        stats: Fitted category counts
        x: Reference category
        values: Categories to compare against

    Returns:
        np.ndarray: One distance per value
    """
    n = float(stats.n_train)
    fx = float(stats.count(x))
    fy = np.array([stats.count(v) for v in values], dtype=float)
    same = np.array([v == x for v in values], dtype=bool)

    if kind == "goodall3":
        p2 = fx * (fx - 1.0) / (n * (n - 1.0)) if n > 1 else 0.0
        sim = np.where(same, 1.0 - p2, 0.0)
    elif kind == "lin":
        px = fx / n
        py = fy / n
        with np.errstate(divide="ignore", invalid="ignore"):
            denom = np.log(px) + np.log(py)
            sim = np.where(denom != 0.0, 2.0 * np.log(px + py) / denom, 0.0)
        sim = np.clip(sim, 0.0, 1.0)
        sim[same] = 1.0
    elif kind == "of":
        sim = 1.0 / (1.0 + np.log(n / fx) * np.log(n / fy))
        sim[same] = 1.0
    else:
        raise DistanceError(f"'{kind}' is not a categorical distance")
    return 1.0 - sim


def categorical_distance(kind: str, stats: CategoricalStats, x: str, y: str) -> float:
    return float(categorical_distances(kind, stats, x, [y])[0])
