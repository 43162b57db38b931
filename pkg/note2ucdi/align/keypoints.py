import logging
from typing import List, Optional, Sequence

import cv2
import numpy as np
from scipy.spatial.distance import cdist

from note2ucdi.align.models import AlignConfig, Correspondence, Keypoint
from note2ucdi.exceptions import AlignmentError, ImageFormatError
from note2ucdi.imgcore.color import as_grayscale
from note2ucdi.imgcore.models import RasterImage
from note2ucdi.imgcore.scaling import axis_scales, shrink, working_scale

logger = logging.getLogger(__name__)

MIN_SIDE = 64


def detect_keypoints(
    gray: RasterImage, config: Optional[AlignConfig] = None
) -> List[Keypoint]:
    """SIFT keypoints with 128-d descriptors, strongest first.

    Detection runs on a copy shrunk to config.working_side; positions and
    scales are reported in the input's pixel frame.
    """
    config = config or AlignConfig()
    if gray.width < MIN_SIDE or gray.height < MIN_SIDE:
        raise ImageFormatError(
            f"keypoint detection needs at least {MIN_SIDE}x{MIN_SIDE}, got {gray.width}x{gray.height}"
        )

    pixels = np.array(as_grayscale(gray).pixels)
    small = shrink(pixels, working_scale(gray.width, gray.height, config.working_side))
    sift = cv2.SIFT_create(nfeatures=config.max_keypoints)
    cv_keypoints, descriptors = sift.detectAndCompute(small, None)
    if descriptors is None:
        raise AlignmentError("featureless image")

    if small is pixels:
        sx = sy = 1.0
    else:
        sx, sy = axis_scales(gray.size, small)
    keypoints = [
        Keypoint(
            x=_to_full(kp.pt[0], sx),
            y=_to_full(kp.pt[1], sy),
            scale=kp.size / sx,
            orientation=np.deg2rad(kp.angle),
            descriptor=descriptor,
        )
        for kp, descriptor in zip(cv_keypoints, descriptors)
        if np.linalg.norm(descriptor) > 0
    ]
    if not keypoints:
        raise AlignmentError("featureless image")

    logger.debug(
        "detected %d keypoints on %dx%d image (searched at %dx%d)",
        len(keypoints),
        gray.width,
        gray.height,
        small.shape[1],
        small.shape[0],
    )
    return keypoints


def _to_full(coord: float, scale: float) -> float:
    # pixel centres sit at +0.5 in both frames
    if scale == 1.0:
        return coord
    return (coord + 0.5) / scale - 0.5


def descriptor_matrix(keypoints: Sequence[Keypoint]) -> np.ndarray:
    return np.stack([kp.descriptor for kp in keypoints]).astype(np.float64)


def match_descriptors(
    a: Sequence[Keypoint], b: Sequence[Keypoint], config: Optional[AlignConfig] = None
) -> List[Correspondence]:
    """Exact nearest-neighbour matching of a onto b.

    A pair survives when it passes the distance-ratio test (best < ratio_test *
    second best) and is mutually nearest. Correspondences run from a's point
    (src) to b's point (dst), ordered by the index in a.
    """
    config = config or AlignConfig()
    if not a or not b:
        raise AlignmentError("insufficient matches")

    distances = cdist(descriptor_matrix(a), descriptor_matrix(b), metric="euclidean")
    nearest = np.argmin(distances, axis=1)
    rows = np.arange(len(a))
    best = distances[rows, nearest]
    if len(b) > 1:
        second = np.partition(distances, 1, axis=1)[:, 1]
    else:
        second = np.full(len(a), np.inf)

    reverse = np.argmin(distances, axis=0)
    keep = (best < config.ratio_test * second) & (reverse[nearest] == rows)

    correspondences = [
        Correspondence(
            src=(a[i].x, a[i].y),
            dst=(b[j].x, b[j].y),
            distance=float(best[i]),
        )
        for i, j in zip(rows[keep], nearest[keep])
    ]
    if len(correspondences) < config.min_matches:
        raise AlignmentError(
            f"insufficient matches: {len(correspondences)} < {config.min_matches}"
        )
    return correspondences
