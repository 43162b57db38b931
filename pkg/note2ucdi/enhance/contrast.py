from typing import Optional, Tuple

import numpy as np

from note2ucdi.enhance.models import EnhanceConfig
from note2ucdi.exceptions import EnhanceError
from note2ucdi.imgcore.color import lab_to_rgb, rgb_to_lab
from note2ucdi.imgcore.models import RasterImage
from note2ucdi.imgcore.stats import percentile, to_uint8

N_BINS = 256


def _stretch_plane(plane: np.ndarray, low_pct: float, high_pct: float) -> np.ndarray:
    low = percentile(plane, low_pct)
    high = percentile(plane, high_pct)
    if high == low:
        return plane
    stretched = 255.0 * (plane.astype(np.float64) - low) / (high - low)
    return to_uint8(stretched)


def contrast_stretch(
    img: RasterImage, config: Optional[EnhanceConfig] = None
) -> RasterImage:
    """Per-channel linear stretch mapping the low/high percentiles to 0/255.

    A constant channel (high percentile == low percentile) is returned unchanged.
    """
    config = config or EnhanceConfig()
    low, high = config.stretch_low_pct, config.stretch_high_pct

    if img.channels == 1:
        return RasterImage(pixels=_stretch_plane(img.pixels, low, high))

    planes = [_stretch_plane(img.pixels[:, :, c], low, high) for c in range(3)]
    return RasterImage(pixels=np.stack(planes, axis=2))


def clip_histogram(hist: np.ndarray, clip_limit: float) -> np.ndarray:
    """Clip every bin at clip_limit and spread the excess uniformly over all bins.

    Single pass: bins that exceed the limit after redistribution are not re-clipped.
    """
    hist = np.asarray(hist, dtype=np.float64)
    excess = np.maximum(hist - clip_limit, 0.0).sum()
    return np.minimum(hist, clip_limit) + excess / hist.size


def tile_mapping(hist: np.ndarray) -> np.ndarray:
    """Intensity lookup table CDF(i) * (255 - 0) + 0 for one tile."""
    hist = np.asarray(hist, dtype=np.float64)
    total = hist.sum()
    if total <= 0:
        return np.arange(hist.size, dtype=np.float64)
    return np.cumsum(hist) / total * 255.0


def clip_limit_for(clip: float, tile_pixels: int) -> float:
    """Absolute per-bin limit for a relative clip factor."""
    return max(1.0, clip * tile_pixels / N_BINS)


def tile_edges(length: int, count: int) -> np.ndarray:
    return np.array([(i * length) // count for i in range(count + 1)], dtype=np.int64)


def _blend_indices(length: int, edges: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Neighbouring tile indices and interpolation weight for every coordinate."""
    centers = (edges[:-1] + edges[1:] - 1) / 2.0
    last = centers.size - 1
    coords = np.arange(length, dtype=np.float64)

    lower = np.clip(np.searchsorted(centers, coords, side="right") - 1, 0, last)
    upper = np.minimum(lower + 1, last)
    span = centers[upper] - centers[lower]
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(span > 0, (coords - centers[lower]) / span, 0.0)
    return lower, upper, np.clip(weight, 0.0, 1.0)


def tile_luts(plane: np.ndarray, clip: float, tiles: Tuple[int, int]) -> np.ndarray:
    """One clipped-histogram mapping per tile, shape (rows, cols, 256)."""
    rows, cols = tiles
    height, width = plane.shape
    if height < rows or width < cols:
        raise EnhanceError("image too small for tile grid")

    row_edges = tile_edges(height, rows)
    col_edges = tile_edges(width, cols)
    luts = np.empty((rows, cols, N_BINS), dtype=np.float64)
    for i in range(rows):
        for j in range(cols):
            tile = plane[row_edges[i] : row_edges[i + 1], col_edges[j] : col_edges[j + 1]]
            hist = np.bincount(tile.ravel(), minlength=N_BINS)
            limit = clip_limit_for(clip, tile.size)
            luts[i, j] = tile_mapping(clip_histogram(hist, limit))
    return luts


def clahe_plane(plane: np.ndarray, clip: float, tiles: Tuple[int, int]) -> np.ndarray:
    """CLAHE on one 8-bit plane with bilinear blending between tile centres."""
    luts = tile_luts(plane, clip, tiles)
    height, width = plane.shape
    r0, r1, wy = _blend_indices(height, tile_edges(height, tiles[0]))
    c0, c1, wx = _blend_indices(width, tile_edges(width, tiles[1]))

    r0, r1, wy = r0[:, None], r1[:, None], wy[:, None]
    c0, c1, wx = c0[None, :], c1[None, :], wx[None, :]
    v = plane.astype(np.intp)

    top = (1.0 - wx) * luts[r0, c0, v] + wx * luts[r0, c1, v]
    bottom = (1.0 - wx) * luts[r1, c0, v] + wx * luts[r1, c1, v]
    return to_uint8((1.0 - wy) * top + wy * bottom)


def clahe(img: RasterImage, config: Optional[EnhanceConfig] = None) -> RasterImage:
    """Contrast-limited adaptive histogram equalization.

    Colour images are equalized on the L channel of their LAB representation.
    """
    config = config or EnhanceConfig()
    if img.channels == 1:
        return RasterImage(
            pixels=clahe_plane(img.pixels, config.clahe_clip, config.clahe_tiles)
        )

    lab = np.array(rgb_to_lab(img).pixels)
    lab[:, :, 0] = clahe_plane(lab[:, :, 0], config.clahe_clip, config.clahe_tiles)
    return lab_to_rgb(RasterImage(pixels=lab))
