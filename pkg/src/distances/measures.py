"""
Distance measures for vector, histogram, time-series and graph payloads.

Every measure comes as a one-against-many function (reference payload versus
a batch of payloads) and a scalar function. The scalar form evaluates the
batch form on a single-element batch, so a precomputed matrix entry and a
direct call always agree bit for bit.
"""
from typing import Sequence

import numpy as np
from scipy.stats import entropy, wasserstein_distance

from ..core.dataset import GraphValue, HistogramValue, TimeSeriesValue
from ..core.errors import DistanceError

MINKOWSKI_KINDS = ("euclidean", "manhattan", "chebyshev")

# Upper bound on cells of one batched DTW cost cube
DTW_BATCH_CELLS = 4_000_000


def _as_vector_batch(x: np.ndarray, ys: np.ndarray):
    x = np.asarray(x, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float)
    if ys.ndim == 1:
        ys = ys.reshape(1, -1)
    if x.size < 1 or ys.shape[1] != x.size:
        raise DistanceError(f"dimension mismatch: {x.size} vs {ys.shape[1]}")
    return x, ys


def minkowski_distances(kind: str, x: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """
    Minkowski distances of order 2 / 1 / inf from x to every row of ys.

    Args:
        kind: "euclidean", "manhattan" or "chebyshev"
        x: Reference vector of dimension d
        ys: Matrix of shape (k, d)

    Returns:
        np.ndarray: k nonnegative distances
    """
    x, ys = _as_vector_batch(x, ys)
    diff = np.abs(ys - x)
    if kind == "euclidean":
        return np.sqrt(np.sum(diff * diff, axis=1))
    if kind == "manhattan":
        return np.sum(diff, axis=1)
    if kind == "chebyshev":
        return np.max(diff, axis=1)
    raise DistanceError(f"'{kind}' is not a Minkowski distance")


def vector_distance(kind: str, x: np.ndarray, y: np.ndarray) -> float:
    y = np.asarray(y, dtype=float).ravel()
    return float(minkowski_distances(kind, x, y.reshape(1, -1))[0])


def cosine_distances(x: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """
    Cosine distances 1 - cos(x, y) in [0, 2].

    A zero vector is at distance 0 from another zero vector and at distance 1
    from any non-zero vector.
    """
    x, ys = _as_vector_batch(x, ys)
    dots = np.sum(ys * x, axis=1)
    xx = np.sum(x * x)
    yy = np.sum(ys * ys, axis=1)
    # sqrt(a * a) == a exactly, so cos(x, x) is exactly 1
    denom = np.sqrt(xx * yy)
    with np.errstate(divide="ignore", invalid="ignore"):
        result = np.clip(1.0 - dots / denom, 0.0, 2.0)
    x_zero = xx == 0.0
    y_zero = yy == 0.0
    result[x_zero & y_zero] = 0.0
    result[x_zero ^ y_zero] = 1.0
    return result


def cosine_distance(x: np.ndarray, y: np.ndarray) -> float:
    y = np.asarray(y, dtype=float).ravel()
    return float(cosine_distances(x, y.reshape(1, -1))[0])


def wasserstein1(h1: HistogramValue, h2: HistogramValue) -> float:
    """Earth mover's distance between two weighted point histograms on the real line."""
    return float(wasserstein_distance(h1.positions, h2.positions, h1.masses, h2.masses))


def wasserstein_distances(h: HistogramValue, values: Sequence[HistogramValue]) -> np.ndarray:
    return np.array([wasserstein1(h, other) for other in values], dtype=float)


def _dtw_batch(a: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """DTW of one sequence against equal-length sequences, filled by anti-diagonals."""
    length_a = len(a)
    batch, length_b = ys.shape
    cost = np.abs(a[None, :, None] - ys[:, None, :])
    acc = np.full((batch, length_a + 1, length_b + 1), np.inf)
    acc[:, 0, 0] = 0.0
    for k in range(2, length_a + length_b + 1):
        i = np.arange(max(1, k - length_b), min(length_a, k - 1) + 1)
        j = k - i
        best = np.minimum(np.minimum(acc[:, i - 1, j], acc[:, i, j - 1]), acc[:, i - 1, j - 1])
        acc[:, i, j] = cost[:, i - 1, j - 1] + best
    return acc[:, length_a, length_b]


def dtw_distances(s: TimeSeriesValue, values: Sequence[TimeSeriesValue]) -> np.ndarray:
    """
    Unconstrained DTW with local cost |a - b| from s to every sequence in values.

    Sequences of equal length are processed together; results do not depend
    on how the batch is grouped.
    """
    a = s.samples
    out = np.empty(len(values), dtype=float)
    lengths = np.array([len(v) for v in values], dtype=int)
    for length in np.unique(lengths):
        members = np.flatnonzero(lengths == length)
        chunk = max(1, DTW_BATCH_CELLS // ((len(a) + 1) * (int(length) + 1)))
        for start in range(0, len(members), chunk):
            part = members[start:start + chunk]
            ys = np.stack([values[i].samples for i in part])
            out[part] = _dtw_batch(a, ys)
    return out


def dtw(s1: TimeSeriesValue, s2: TimeSeriesValue) -> float:
    return float(dtw_distances(s1, [s2])[0])


def _degree_distribution(g: GraphValue, size: int) -> np.ndarray:
    hist = g.degree_histogram
    padded = np.zeros(size, dtype=float)
    padded[:len(hist)] = hist
    return padded / padded.sum()


def degree_divergence(g1: GraphValue, g2: GraphValue) -> float:
    """
    Jensen-Shannon divergence (base 2) between the node-degree distributions.

    Returns:
        float: Value in [0, 1]; 0 iff both graphs have the same degree distribution
    """
    size = max(len(g1.degree_histogram), len(g2.degree_histogram))
    p = _degree_distribution(g1, size)
    q = _degree_distribution(g2, size)
    m = 0.5 * (p + q)
    jsd = 0.5 * entropy(p, m, base=2) + 0.5 * entropy(q, m, base=2)
    return float(min(max(jsd, 0.0), 1.0))


def degree_divergences(g: GraphValue, values: Sequence[GraphValue]) -> np.ndarray:
    return np.array([degree_divergence(g, other) for other in values], dtype=float)
