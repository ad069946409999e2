"""
Tests for average precision and ROC AUC.
"""
import itertools

import numpy as np
import pytest

from src.core.errors import EvaluationError
from src.evaluation.metrics import average_precision, roc_auc

ALPHABET = (0.1, 0.5, 0.9)


def brute_force_ap(labels, scores):
    """Mean precision at the rank of each positive; equal scores rank by index."""
    n = len(labels)
    precisions = []
    for i in range(n):
        if not labels[i]:
            continue
        ahead = [j for j in range(n) if scores[j] > scores[i] or (scores[j] == scores[i] and j <= i)]
        precisions.append(sum(labels[j] for j in ahead) / len(ahead))
    return sum(precisions) / len(precisions)


def brute_force_auc(labels, scores):
    """Pair counting: 1 per correctly ordered pair, 1/2 per tie."""
    wins = 0.0
    pairs = 0
    for i, j in itertools.product(range(len(labels)), repeat=2):
        if labels[i] == 1 and labels[j] == 0:
            pairs += 1
            wins += 1.0 if scores[i] > scores[j] else 0.5 if scores[i] == scores[j] else 0.0
    return wins / pairs


def _labelled_vectors(max_length):
    for n in range(1, max_length + 1):
        for labels in itertools.product((0, 1), repeat=n):
            for scores in itertools.product(ALPHABET, repeat=n):
                yield list(labels), list(scores)


def test_average_precision_examples():
    assert average_precision([1, 0], [0.9, 0.1]) == 1.0
    assert average_precision([0, 1], [0.9, 0.1]) == 0.5


def test_tied_scores_rank_by_index():
    assert average_precision([1, 0, 0], [0.5, 0.5, 0.5]) == 1.0
    assert average_precision([0, 0, 1], [0.5, 0.5, 0.5]) == pytest.approx(1 / 3)


def test_roc_auc_examples():
    assert roc_auc([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]) == 1.0
    assert roc_auc([0, 1, 0, 1], [0.4, 0.4, 0.4, 0.4]) == 0.5
    assert roc_auc([1, 0, 1, 0], [0.9, 0.8, 0.3, 0.1]) == 0.75


def test_metrics_match_brute_force_exhaustively():
    for labels, scores in _labelled_vectors(6):
        if 1 in labels:
            assert average_precision(labels, scores) == pytest.approx(brute_force_ap(labels, scores), abs=1e-12)
        if 0 in labels and 1 in labels:
            assert roc_auc(labels, scores) == pytest.approx(brute_force_auc(labels, scores), abs=1e-12)


@pytest.mark.parametrize("n", [7, 8])
def test_metrics_match_brute_force_on_longer_vectors(n):
    rng = np.random.default_rng(n)
    for _ in range(3000):
        labels = rng.integers(0, 2, size=n).tolist()
        scores = [ALPHABET[k] for k in rng.integers(0, 3, size=n)]
        if 1 in labels:
            assert average_precision(labels, scores) == pytest.approx(brute_force_ap(labels, scores), abs=1e-12)
        if 0 in labels and 1 in labels:
            assert roc_auc(labels, scores) == pytest.approx(brute_force_auc(labels, scores), abs=1e-12)


def test_metrics_ignore_monotone_transforms():
    rng = np.random.default_rng(0)
    for _ in range(200):
        labels = rng.integers(0, 2, size=12)
        labels[:2] = [0, 1]
        scores = rng.choice(np.linspace(0.0, 1.0, 5), size=12)
        transformed = np.exp(3.0 * scores) - 7.0
        assert average_precision(labels, transformed) == average_precision(labels, scores)
        assert roc_auc(labels, transformed) == roc_auc(labels, scores)


def test_metric_errors():
    with pytest.raises(EvaluationError, match="at least one outlier"):
        average_precision([0, 0], [0.1, 0.2])
    with pytest.raises(EvaluationError, match="both inliers and outliers"):
        roc_auc([1, 1], [0.1, 0.2])
    with pytest.raises(EvaluationError, match="differ in length"):
        roc_auc([0, 1], [0.1])
