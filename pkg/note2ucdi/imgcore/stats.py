import math
from typing import Sequence, Union

import numpy as np


def round_half_away(values: np.ndarray) -> np.ndarray:
    """Round to the nearest integer, halves away from zero (numpy rounds halves to even)."""
    values = np.asarray(values, dtype=np.float64)
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def to_uint8(values: np.ndarray) -> np.ndarray:
    """Round half away from zero and clamp into [0, 255]."""
    return np.clip(round_half_away(values), 0, 255).astype(np.uint8)


def percentile(values: Union[np.ndarray, Sequence[float]], p: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest sample.

    p = 0 yields the minimum.
    """
    samples = np.asarray(values).ravel()
    if samples.size == 0:
        raise ValueError("percentile of an empty sample set")
    if not 0 <= p <= 100:
        raise ValueError(f"percentile must be within [0, 100], got {p}")

    n = samples.size
    rank = max(1, math.ceil(p * n / 100))
    return float(np.partition(samples, rank - 1)[rank - 1])
