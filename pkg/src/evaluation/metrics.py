"""
Threshold-free ranking metrics for outlier scores.
"""
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from ..core.errors import EvaluationError


def _as_arrays(labels: Sequence[int], scores: Sequence[float]):
    labels = np.asarray(labels, dtype=int).ravel()
    scores = np.asarray(scores, dtype=float).ravel()
    if labels.shape != scores.shape:
        raise EvaluationError(f"labels and scores differ in length: {len(labels)} vs {len(scores)}")
    return labels, scores


def average_precision(labels: Sequence[int], scores: Sequence[float]) -> float:
    """
    Step-function average precision.

    Examples are ranked by descending score; ties keep ascending original
    index order. AP is the mean of precision@k over the ranks k of the positives.

    Args:
        labels: 0/1 labels, 1 = outlier
        scores: Outlier scores, higher = more anomalous

    Returns:
        float: AP in [0, 1]

    Raises:
        EvaluationError: if there are no positives
    """
    labels, scores = _as_arrays(labels, scores)
    positives = int(labels.sum())
    if positives == 0:
        raise EvaluationError("average precision needs at least one outlier")
    order = np.argsort(-scores, kind="stable")
    hits = labels[order]
    ranks = np.flatnonzero(hits) + 1
    precision_at_hits = np.arange(1, positives + 1) / ranks
    return float(precision_at_hits.sum() / positives)


def roc_auc(labels: Sequence[int], scores: Sequence[float]) -> float:
    """
    Area under the ROC curve in its Mann-Whitney form.

    P(score+ > score-) + 0.5 P(score+ = score-) over all positive-negative pairs,
    computed from mid-ranks.

    Raises:
        EvaluationError: if only one class is present
    """
    labels, scores = _as_arrays(labels, scores)
    positives = int(labels.sum())
    negatives = len(labels) - positives
    if positives == 0 or negatives == 0:
        raise EvaluationError("ROC AUC needs both inliers and outliers")
    ranks = rankdata(scores)
    rank_sum = ranks[labels == 1].sum()
    return float((rank_sum - positives * (positives + 1) / 2.0) / (positives * negatives))
