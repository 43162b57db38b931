from typing import List, Tuple

import cv2
import numpy as np
from scipy import ndimage

from note2ucdi.imgcore.models import BinaryMask, Component

# 8-connectivity
_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def elliptical_kernel(radius: int) -> np.ndarray:
    size = 2 * radius + 1
    return cv2.getStructuringElement(cv2.MORPH_ELLIPSE, (size, size))


def morph_open_close(mask: BinaryMask, kernel_radius: int) -> BinaryMask:
    """Opening (erode -> dilate) followed by closing (dilate -> erode).

    Borders are replicate-padded so the note edge never erodes against a phantom
    background.
    """
    if kernel_radius < 1:
        raise ValueError(f"kernel radius must be >= 1, got {kernel_radius}")

    kernel = elliptical_kernel(kernel_radius)
    src = mask.to_uint8()
    opened = cv2.morphologyEx(
        src, cv2.MORPH_OPEN, kernel, borderType=cv2.BORDER_REPLICATE
    )
    closed = cv2.morphologyEx(
        opened, cv2.MORPH_CLOSE, kernel, borderType=cv2.BORDER_REPLICATE
    )
    return BinaryMask(bits=closed > 0)


def label_components(mask: BinaryMask) -> Tuple[np.ndarray, int]:
    """8-connected labels in raster-scan order of each component's first pixel."""
    labels, count = ndimage.label(mask.bits, structure=_EIGHT_CONNECTED)
    return labels, int(count)


def connected_components(mask: BinaryMask, min_area: int = 0) -> Tuple[List[Component], int]:
    """Split a mask into its 8-connected components, dropping those below min_area.

    Components come in label order, each cropped to its bounding box.
    """
    if min_area < 0:
        raise ValueError(f"min_area must be >= 0, got {min_area}")

    labels, count = label_components(mask)
    if count == 0:
        return [], 0

    areas = np.bincount(labels.ravel(), minlength=count + 1)
    components = []
    for label, window in enumerate(ndimage.find_objects(labels), start=1):
        if window is None or areas[label] < min_area:
            continue
        rows, cols = window
        components.append(
            Component(
                label=label,
                area=int(areas[label]),
                bbox=(cols.start, rows.start, cols.stop - cols.start, rows.stop - rows.start),
                mask=BinaryMask(bits=labels[window] == label),
            )
        )
    return components, len(components)
