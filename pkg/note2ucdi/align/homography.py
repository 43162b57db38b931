import hashlib
import logging
import math
from typing import Optional, Sequence, Tuple

import cv2
import numpy as np

from note2ucdi.align.models import AlignConfig, Correspondence, Homography, HomographyEstimate
from note2ucdi.exceptions import AlignmentError
from note2ucdi.imgcore.models import BinaryMask, RasterImage

logger = logging.getLogger(__name__)

SAMPLE_SIZE = 4
WHITE = (255, 255, 255)


def _normalize_points(pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Hartley normalization: centroid to the origin, mean distance sqrt(2)."""
    centroid = pts.mean(axis=0)
    spread = np.sqrt(((pts - centroid) ** 2).sum(axis=1)).mean() + 1e-12
    s = math.sqrt(2) / spread
    T = np.array([[s, 0, -s * centroid[0]], [0, s, -s * centroid[1]], [0, 0, 1]])
    return (pts - centroid) * s, T


def _dlt(src: np.ndarray, dst: np.ndarray) -> Optional[np.ndarray]:
    """Least-squares DLT on normalized coordinates; None when degenerate."""
    src_n, T_src = _normalize_points(src)
    dst_n, T_dst = _normalize_points(dst)
    x, y = src_n[:, 0], src_n[:, 1]
    u, v = dst_n[:, 0], dst_n[:, 1]
    n = len(src)
    zeros, ones = np.zeros(n), np.ones(n)

    A = np.zeros((2 * n, 9))
    A[0::2] = np.c_[x, y, ones, zeros, zeros, zeros, -u * x, -u * y, -u]
    A[1::2] = np.c_[zeros, zeros, zeros, -x, -y, -ones, v * x, v * y, v]
    if np.linalg.matrix_rank(A) < 8:
        return None

    _, _, Vt = np.linalg.svd(A)
    H = np.linalg.inv(T_dst) @ Vt[-1].reshape(3, 3) @ T_src
    if abs(H[2, 2]) < 1e-12 or not np.all(np.isfinite(H)):
        return None
    H = H / H[2, 2]
    if abs(np.linalg.det(H)) <= 1e-8:
        return None
    return H


def _reprojection_error(H: np.ndarray, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    projected = np.c_[src, np.ones(len(src))] @ H.T
    w = projected[:, 2:3]
    with np.errstate(divide="ignore", invalid="ignore"):
        mapped = projected[:, :2] / w
    err = np.sqrt(((mapped - dst) ** 2).sum(axis=1))
    return np.where(np.isfinite(err), err, np.inf)


def _collinear(pts: np.ndarray, eps: float = 1e-6) -> bool:
    for i, j, k in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        (ax, ay), (bx, by) = pts[j] - pts[i], pts[k] - pts[i]
        area = abs(ax * by - ay * bx)
        if area <= eps:
            return True
    return False


def _seed_from(data: np.ndarray) -> int:
    digest = hashlib.sha256(np.ascontiguousarray(data).tobytes()).digest()
    return int.from_bytes(digest[:8], "little")


def _required_iterations(inlier_ratio: float, confidence: float, cap: int) -> int:
    if inlier_ratio >= 1.0:
        return 1
    if inlier_ratio <= 0.0:
        return cap
    denom = math.log(1.0 - inlier_ratio**SAMPLE_SIZE)
    if denom >= 0:
        return cap
    return min(cap, int(math.ceil(math.log(1.0 - confidence) / denom)))


def estimate_homography(
    correspondences: Sequence[Correspondence], config: Optional[AlignConfig] = None
) -> HomographyEstimate:
    """Robust src -> dst homography by RANSAC over 4-point DLT hypotheses.

    The correspondences are sorted before sampling and the generator is seeded
    from the sorted data, so the estimate does not depend on list order. The
    winning hypothesis is refit by least squares on its inliers.
    """
    config = config or AlignConfig()
    if len(correspondences) < SAMPLE_SIZE:
        raise AlignmentError(
            f"alignment failed: {len(correspondences)} correspondences, need {SAMPLE_SIZE}"
        )

    pairs = np.array([(*c.src, *c.dst) for c in correspondences], dtype=np.float64)
    order = np.lexsort(pairs.T[::-1])
    pairs = pairs[order]
    src, dst = pairs[:, :2], pairs[:, 2:]
    n = len(pairs)
    threshold = config.ransac_reproj_threshold
    rng = np.random.default_rng([_seed_from(pairs), config.seed])

    best_H: Optional[np.ndarray] = None
    best_inliers = np.zeros(n, dtype=bool)
    best_score = np.inf
    needed = config.ransac_max_iters
    iteration = 0
    while iteration < needed:
        iteration += 1
        sample = rng.choice(n, size=SAMPLE_SIZE, replace=False)
        if _collinear(src[sample]) or _collinear(dst[sample]):
            continue
        H = _dlt(src[sample], dst[sample])
        if H is None:
            continue
        err = _reprojection_error(H, src, dst)
        # MSAC: truncated squared error
        score = np.minimum(err**2, threshold**2).sum()
        if score < best_score:
            best_score = score
            best_H = H
            best_inliers = err < threshold
            needed = _required_iterations(
                best_inliers.mean(), config.ransac_confidence, config.ransac_max_iters
            )

    if best_H is None:
        raise AlignmentError("alignment failed: no non-degenerate sample")

    # refit on inliers until the set stops changing
    for _ in range(5):
        if best_inliers.sum() < SAMPLE_SIZE:
            break
        refit = _dlt(src[best_inliers], dst[best_inliers])
        if refit is None:
            break
        inliers = _reprojection_error(refit, src, dst) < threshold
        if inliers.sum() < best_inliers.sum():
            break
        best_H = refit
        if np.array_equal(inliers, best_inliers):
            break
        best_inliers = inliers

    inlier_count = int(best_inliers.sum())
    logger.debug("RANSAC: %d/%d inliers after %d iterations", inlier_count, n, iteration)
    if inlier_count < config.min_inliers:
        raise AlignmentError(
            f"alignment failed: {inlier_count} inliers < {config.min_inliers}"
        )

    mask = np.zeros(n, dtype=bool)
    mask[order] = best_inliers
    return HomographyEstimate(
        homography=Homography(values=best_H), inliers=[bool(v) for v in mask]
    )


def warp_to_reference(
    damaged: RasterImage, H: Homography, ref_size: Tuple[int, int]
) -> RasterImage:
    """Resample the damaged note into the reference frame (ref_size = width, height).

    Pixels that map outside the source are white.
    """
    width, height = ref_size
    fill = WHITE if damaged.channels == 3 else 255
    warped = cv2.warpPerspective(
        np.array(damaged.pixels),
        H.matrix,
        (width, height),
        flags=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_CONSTANT,
        borderValue=fill,
    )
    return RasterImage(pixels=warped)


def warp_mask(mask: BinaryMask, H: Homography, ref_size: Tuple[int, int]) -> BinaryMask:
    width, height = ref_size
    warped = cv2.warpPerspective(
        mask.to_uint8(),
        H.matrix,
        (width, height),
        flags=cv2.INTER_NEAREST,
        borderMode=cv2.BORDER_CONSTANT,
        borderValue=0,
    )
    return BinaryMask(bits=warped > 0)
