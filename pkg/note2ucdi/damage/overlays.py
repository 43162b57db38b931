from typing import Optional, Sequence

import cv2
import numpy as np

from note2ucdi.damage.models import ClusterMatch
from note2ucdi.imgcore.models import BinaryMask, RasterImage
from note2ucdi.imgcore.stats import to_uint8

RED = (255, 0, 0)
GREEN = (0, 200, 0)


def _rgb(img: RasterImage) -> np.ndarray:
    pixels = np.array(img.pixels)
    if img.channels == 1:
        pixels = cv2.cvtColor(pixels, cv2.COLOR_GRAY2RGB)
    return pixels


def render_damage_overlay(warped: RasterImage, damage_mask: BinaryMask) -> RasterImage:
    """Warped note with every damaged pixel painted red."""
    pixels = _rgb(warped)
    pixels[damage_mask.bits] = RED
    return RasterImage(pixels=pixels)


def render_heatmap(heatmap: np.ndarray, mask: Optional[BinaryMask] = None) -> RasterImage:
    """JET colour map of the per-pixel difference (0-255 scale); outside mask is black."""
    colored = cv2.applyColorMap(to_uint8(heatmap), cv2.COLORMAP_JET)
    rgb = cv2.cvtColor(colored, cv2.COLOR_BGR2RGB)
    if mask is not None:
        rgb[~mask.bits] = 0
    return RasterImage(pixels=rgb)


def render_cluster_annotations(
    warped: RasterImage, matches: Sequence[ClusterMatch]
) -> RasterImage:
    """Cluster boxes on the warped note: green when found, red when missing."""
    pixels = _rgb(warped)
    for match in matches:
        x, y, w, h = match.bbox
        color = RED if match.missing else GREEN
        cv2.rectangle(pixels, (x, y), (x + w - 1, y + h - 1), color, 2)
        cv2.putText(
            pixels,
            f"{match.score:.2f}",
            (x, max(10, y - 3)),
            cv2.FONT_HERSHEY_SIMPLEX,
            0.35,
            color,
            1,
            cv2.LINE_AA,
        )
    return RasterImage(pixels=pixels)
