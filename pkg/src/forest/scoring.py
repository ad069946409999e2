"""
Path-length normalisation and the anomaly score formula.
"""
import math
from typing import Union

import numpy as np

EULER_GAMMA = 0.5772156649


def avg_path_c(size: int) -> float:
    """
    Average path length of an unsuccessful search in a binary search tree of `size` keys.

    Args:
        size: Number of examples

    Returns:
        float: c(size); 0 for sizes 0 and 1, 1 for size 2
    """
    if size <= 1:
        return 0.0
    if size == 2:
        return 1.0
    return 2.0 * (math.log(size - 1) + EULER_GAMMA) - 2.0 * (size - 1) / size


def anomaly_score(mean_path_length: Union[float, np.ndarray], c_norm: float) -> Union[float, np.ndarray]:
    """s = 2^(-E/c). Scalars and arrays go through the same numpy power."""
    scores = np.power(2.0, -np.asarray(mean_path_length, dtype=float) / c_norm)
    return float(scores) if scores.ndim == 0 else scores
