"""
Synthetic labeled datasets with planted outliers.
"""
import logging

import numpy as np

from ..core.dataset import Dataset, FeatureColumn, FeatureKind, TimeSeriesValue
from ..core.errors import ConfigError

logger = logging.getLogger(__name__)

CATEGORY_TOKENS = ("a", "b", "c", "d")
SERIES_LENGTH = 32
BURST_LENGTH = 4
BURST_AMPLITUDE = 5.0
OUTLIER_BOX = 6.0


def _outlier_count(n: int, outlier_fraction: float) -> int:
    if n < 20:
        raise ConfigError(f"synthetic datasets need n >= 20, got {n}")
    if not 0.0 < outlier_fraction < 0.5:
        raise ConfigError(f"outlier fraction must lie in (0, 0.5), got {outlier_fraction}")
    return int(round(n * outlier_fraction))


def synth_gaussian(n: int, outlier_fraction: float, dims: int = 2, seed: int = 0) -> Dataset:
    """
    Standard-normal inliers with outliers uniform on [-6, 6]^dims.

    Args:
        n: Number of examples
        outlier_fraction: Share of outliers, in (0, 0.5)
        dims: Dimensionality of the single vector column "x"
        seed: Random seed

    Returns:
        Dataset: Labeled dataset, rows shuffled
    """
    n_out = _outlier_count(n, outlier_fraction)
    if dims < 1:
        raise ConfigError(f"dims must be positive, got {dims}")
    rng = np.random.default_rng(seed)
    inliers = rng.standard_normal((n - n_out, dims))
    outliers = rng.uniform(-OUTLIER_BOX, OUTLIER_BOX, size=(n_out, dims))
    values = np.vstack([inliers, outliers])
    labels = np.concatenate([np.zeros(n - n_out, dtype=int), np.ones(n_out, dtype=int)])
    order = rng.permutation(n)
    logger.debug(f"Generated gaussian dataset: n={n}, outliers={n_out}, dims={dims}, seed={seed}")
    return Dataset(
        columns=(FeatureColumn(id="x", kind=FeatureKind.VECTOR, values=values[order]),),
        labels=labels[order],
        name="gaussian",
    )


def synth_multimodal(n: int, outlier_fraction: float, seed: int = 0) -> Dataset:
    """
    Three-column dataset whose outliers show only in the time series.

    Columns: "num" (N(0, 1) for every row), "cat" (uniform over four tokens)
    and "ts" (32-sample sine with random phase; outliers add a burst of
    amplitude 5 over 4 consecutive samples).
    """
    n_out = _outlier_count(n, outlier_fraction)
    rng = np.random.default_rng(seed)
    numeric = rng.standard_normal((n, 1))
    categories = [CATEGORY_TOKENS[i] for i in rng.integers(len(CATEGORY_TOKENS), size=n)]
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n)
    steps = 2.0 * np.pi * np.arange(SERIES_LENGTH) / SERIES_LENGTH
    series = np.sin(steps[None, :] + phases[:, None])
    labels = np.zeros(n, dtype=int)
    labels[n - n_out:] = 1
    starts = rng.integers(0, SERIES_LENGTH - BURST_LENGTH + 1, size=n_out)
    for row, start in zip(range(n - n_out, n), starts):
        series[row, start:start + BURST_LENGTH] += BURST_AMPLITUDE

    order = rng.permutation(n)
    logger.debug(f"Generated multimodal dataset: n={n}, outliers={n_out}, seed={seed}")
    return Dataset(
        columns=(
            FeatureColumn(id="num", kind=FeatureKind.NUMERIC, values=numeric[order]),
            FeatureColumn(id="cat", kind=FeatureKind.CATEGORICAL, values=[categories[i] for i in order]),
            FeatureColumn(id="ts", kind=FeatureKind.TIMESERIES,
                          values=[TimeSeriesValue(series[i]) for i in order]),
        ),
        labels=labels[order],
        name="multimodal",
    )
