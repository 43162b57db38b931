import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import cv2
import numpy as np
from sklearn.cluster import DBSCAN

from note2ucdi.damage.models import ClusterMatch, DamageConfig, FeatureCluster
from note2ucdi.exceptions import DamageError
from note2ucdi.imgcore.color import as_grayscale
from note2ucdi.imgcore.models import BinaryMask, RasterImage
from note2ucdi.imgcore.morphology import elliptical_kernel
from note2ucdi.imgcore.scaling import axis_scales, shrink, working_scale

logger = logging.getLogger(__name__)

# windows flatter than this (variance, grey levels squared) carry no correlation signal
FLAT_VARIANCE = 1e-3


def diagonal(width: int, height: int) -> float:
    return math.hypot(width, height)


def salient_edges(gray: np.ndarray, mask: BinaryMask, config: DamageConfig) -> np.ndarray:
    """Adaptive local-mean edge map restricted to the note interior.

    The foreground is eroded by half the adaptive window so the note outline
    against the white background does not register as a feature.
    """
    edges = cv2.adaptiveThreshold(
        gray,
        255,
        cv2.ADAPTIVE_THRESH_MEAN_C,
        cv2.THRESH_BINARY_INV,
        config.adaptive_block_size,
        config.adaptive_offset,
    )
    interior = cv2.erode(
        mask.to_uint8(),
        elliptical_kernel(config.adaptive_block_size // 2 + 1),
        borderType=cv2.BORDER_REPLICATE,
    )
    return np.where(interior > 0, edges, 0).astype(np.uint8)


def contour_points(edges: np.ndarray, max_points: int) -> np.ndarray:
    """Unique contour pixels (x, y) in raster order, evenly thinned to max_points."""
    contours, _ = cv2.findContours(edges, cv2.RETR_LIST, cv2.CHAIN_APPROX_NONE)
    if not contours:
        return np.empty((0, 2), dtype=np.int64)

    points = np.concatenate([c.reshape(-1, 2) for c in contours]).astype(np.int64)
    points = np.unique(points, axis=0)
    points = points[np.lexsort((points[:, 0], points[:, 1]))]
    if len(points) > max_points:
        keep = np.unique(np.linspace(0, len(points) - 1, max_points).round().astype(np.int64))
        points = points[keep]
    return points


def cluster_points(points: np.ndarray, eps: float, min_samples: int) -> np.ndarray:
    """DBSCAN labels per point; -1 marks noise."""
    if len(points) == 0:
        return np.empty(0, dtype=np.int64)
    return DBSCAN(eps=eps, min_samples=min_samples).fit(points).labels_


def extract_feature_clusters(
    ref: RasterImage, mask: BinaryMask, config: Optional[DamageConfig] = None
) -> List[FeatureCluster]:
    """Group salient reference contours into motifs, each with a padded template patch."""
    config = config or DamageConfig()
    gray = np.array(as_grayscale(ref).pixels)
    height, width = gray.shape

    points = contour_points(salient_edges(gray, mask, config), config.max_contour_points)
    eps = config.dbscan_eps * diagonal(width, height)
    labels = cluster_points(points, eps, config.dbscan_min_samples)

    pad = config.template_padding
    clusters = []
    for label in sorted(set(labels.tolist()) - {-1}):
        members = points[labels == label]
        x0, y0 = members.min(axis=0)
        x1, y1 = members.max(axis=0)
        tx0, ty0 = max(0, x0 - pad), max(0, y0 - pad)
        tx1, ty1 = min(width, x1 + 1 + pad), min(height, y1 + 1 + pad)
        clusters.append(
            FeatureCluster(
                id=len(clusters),
                points=members,
                bbox=(int(x0), int(y0), int(x1 - x0 + 1), int(y1 - y0 + 1)),
                template=RasterImage(pixels=gray[ty0:ty1, tx0:tx1]),
                template_origin=(int(tx0), int(ty0)),
            )
        )

    if not clusters:
        raise DamageError("no salient features in reference")
    logger.debug("%d contour points -> %d feature clusters", len(points), len(clusters))
    return clusters


def search_window(
    cluster: FeatureCluster, width: int, height: int, margin: float
) -> Tuple[int, int, int, int]:
    """Cluster box dilated by margin pixels, clipped to the frame and grown to hold the template."""
    x, y, w, h = cluster.bbox
    m = int(math.ceil(margin))
    tx, ty = cluster.template_origin
    tw, th = cluster.template.width, cluster.template.height
    x0 = min(max(0, x - m), tx)
    y0 = min(max(0, y - m), ty)
    x1 = max(min(width, x + w + m), tx + tw)
    y1 = max(min(height, y + h + m), ty + th)
    return x0, y0, x1, y1


def _window_variance(window: np.ndarray, th: int, tw: int) -> np.ndarray:
    s, sq = cv2.integral2(window, sdepth=cv2.CV_64F)
    n = th * tw

    def box(table: np.ndarray) -> np.ndarray:
        return table[th:, tw:] - table[:-th, tw:] - table[th:, :-tw] + table[:-th, :-tw]

    total = box(s)
    return (box(sq) - total * total / n) / n


def ncc_scores(window: np.ndarray, template: np.ndarray) -> np.ndarray:
    """Zero-mean normalized cross-correlation of template at every placement in window."""
    th, tw = template.shape
    if template.astype(np.float64).var() < FLAT_VARIANCE:
        return np.zeros((window.shape[0] - th + 1, window.shape[1] - tw + 1))
    scores = cv2.matchTemplate(window, template, cv2.TM_CCOEFF_NORMED).astype(np.float64)
    scores = np.nan_to_num(scores, nan=0.0, posinf=0.0, neginf=0.0)
    scores[_window_variance(window, th, tw) < FLAT_VARIANCE] = 0.0
    return np.clip(scores, -1.0, 1.0)


def match_cluster(
    cluster: FeatureCluster,
    gray: np.ndarray,
    config: DamageConfig,
    frame_size: Optional[Tuple[int, int]] = None,
) -> ClusterMatch:
    """Best NCC placement of one cluster template.

    gray may be a shrunk copy of a frame_size (width, height) frame; the search
    window and the template are scaled to it and the location is mapped back.
    """
    width, height = frame_size or (gray.shape[1], gray.shape[0])
    margin = config.ncc_search_margin_fraction * diagonal(width, height)
    x0, y0, x1, y1 = search_window(cluster, width, height, margin)
    template = np.array(cluster.template.pixels)

    sx, sy = axis_scales((width, height), gray)
    if (sx, sy) != (1.0, 1.0):
        x0, y0 = int(math.floor(x0 * sx)), int(math.floor(y0 * sy))
        x1 = min(gray.shape[1], int(math.ceil(x1 * sx)))
        y1 = min(gray.shape[0], int(math.ceil(y1 * sy)))
        tw = max(1, min(x1 - x0, int(round(template.shape[1] * sx))))
        th = max(1, min(y1 - y0, int(round(template.shape[0] * sy))))
        template = cv2.resize(template, (tw, th), interpolation=cv2.INTER_AREA)

    scores = ncc_scores(gray[y0:y1, x0:x1], template)
    py, px = np.unravel_index(int(np.argmax(scores)), scores.shape)
    score = float(scores[py, px])
    return ClusterMatch(
        cluster_id=cluster.id,
        score=score,
        location=(int(round((x0 + px) / sx)), int(round((y0 + py) / sy))),
        bbox=cluster.bbox,
        missing=score < config.ncc_missing_threshold,
    )


def match_feature_clusters(
    clusters: Sequence[FeatureCluster],
    warped: RasterImage,
    config: Optional[DamageConfig] = None,
) -> Tuple[List[ClusterMatch], int]:
    """Best windowed NCC score of every cluster template in the warped note.

    Frames longer than config.match_working_side are searched at that size.
    Returns the matches in cluster order and the number flagged missing.
    """
    config = config or DamageConfig()
    gray = np.array(as_grayscale(warped).pixels)
    for cluster in clusters:
        tx, ty = cluster.template_origin
        if tx + cluster.template.width > gray.shape[1] or ty + cluster.template.height > gray.shape[0]:
            raise DamageError("warped image is smaller than the reference frame")

    small = shrink(gray, working_scale(warped.width, warped.height, config.match_working_side))
    with ThreadPoolExecutor(max_workers=config.workers) as executor:
        matches = list(
            executor.map(lambda c: match_cluster(c, small, config, warped.size), clusters)
        )

    missing = sum(m.missing for m in matches)
    return matches, missing
