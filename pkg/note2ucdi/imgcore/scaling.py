from typing import Tuple

import cv2
import numpy as np


def working_scale(width: int, height: int, max_side: int) -> float:
    """Factor bringing the longer side down to max_side; 1.0 if it fits or max_side is 0."""
    longest = max(width, height)
    if max_side <= 0 or longest <= max_side:
        return 1.0
    return max_side / longest


def shrink(pixels: np.ndarray, scale: float) -> np.ndarray:
    """Area-averaged downscale; the input array itself when scale >= 1."""
    if scale >= 1.0:
        return pixels
    height, width = pixels.shape[:2]
    size = (max(1, int(round(width * scale))), max(1, int(round(height * scale))))
    return cv2.resize(pixels, size, interpolation=cv2.INTER_AREA)


def axis_scales(full: Tuple[int, int], small: np.ndarray) -> Tuple[float, float]:
    """Per-axis small/full ratios for a (width, height) frame and its shrunk pixels."""
    return small.shape[1] / full[0], small.shape[0] / full[1]
