"""
Dataset builders shared by the tests.
"""
import numpy as np

from src.core.dataset import (
    Dataset,
    FeatureColumn,
    FeatureKind,
    GraphValue,
    HistogramValue,
    TimeSeriesValue,
)

MIXED_DISTANCES = {
    "num": ["euclidean", "identity"],
    "vec": ["euclidean", "cosine", "manhattan", "chebyshev"],
    "cat": ["goodall3", "lin", "of"],
    "hist": ["wasserstein1"],
    "ts": ["dtw"],
    "graph": ["degree_divergence"],
}


def random_graph(rng, num_nodes):
    edges = []
    for a in range(num_nodes):
        for b in range(a + 1, num_nodes):
            if rng.random() < 0.4:
                edges.append((a, b))
    return GraphValue(num_nodes=num_nodes, edges=tuple(edges))


def make_mixed_dataset(n=24, seed=0, labels=False):
    """Dataset with one column of every kind."""
    rng = np.random.default_rng(seed)
    histograms = []
    for _ in range(n):
        positions = np.sort(rng.choice(10, size=3, replace=False)).astype(float)
        histograms.append(HistogramValue(positions=positions, masses=[0.25, 0.25, 0.5]))
    columns = (
        FeatureColumn(id="num", kind=FeatureKind.NUMERIC, values=rng.normal(size=(n, 1))),
        FeatureColumn(id="vec", kind=FeatureKind.VECTOR, values=rng.normal(size=(n, 3))),
        FeatureColumn(id="cat", kind=FeatureKind.CATEGORICAL,
                      values=[["red", "green", "blue"][i] for i in rng.integers(3, size=n)]),
        FeatureColumn(id="hist", kind=FeatureKind.HISTOGRAM, values=histograms),
        FeatureColumn(id="ts", kind=FeatureKind.TIMESERIES,
                      values=[TimeSeriesValue(rng.normal(size=rng.integers(3, 7))) for _ in range(n)]),
        FeatureColumn(id="graph", kind=FeatureKind.GRAPH,
                      values=[random_graph(rng, int(rng.integers(2, 6))) for _ in range(n)]),
    )
    label_values = None
    if labels:
        label_values = np.zeros(n, dtype=int)
        label_values[:max(2, n // 10)] = 1
    return Dataset(columns=columns, labels=label_values, name="mixed")


def make_numeric_dataset(values, column_id="x"):
    values = np.asarray(values, dtype=float).reshape(-1, 1)
    return Dataset(columns=(FeatureColumn(id=column_id, kind=FeatureKind.NUMERIC, values=values),), name="numeric")
