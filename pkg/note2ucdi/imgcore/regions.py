from typing import Optional, Tuple

import numpy as np

from note2ucdi.imgcore.models import BinaryMask, RegionMasks

Bounds = Tuple[int, int, int, int]  # x, y, width, height


def _side(fraction: float, width: int, height: int) -> int:
    return max(1, int(round(fraction * min(width, height))))


def mask_bounds(mask: BinaryMask) -> Optional[Bounds]:
    """Bounding box of the set pixels, or None for an empty mask."""
    rows = np.flatnonzero(mask.bits.any(axis=1))
    cols = np.flatnonzero(mask.bits.any(axis=0))
    if rows.size == 0:
        return None
    return int(cols[0]), int(rows[0]), int(cols[-1] - cols[0] + 1), int(rows[-1] - rows[0] + 1)


def build_region_masks(
    width: int,
    height: int,
    edge_fraction: float,
    corner_fraction: float,
    bounds: Optional[Bounds] = None,
) -> RegionMasks:
    """Border strips of edge_fraction * min(w, h) and corner squares of
    corner_fraction * min(w, h), laid out inside bounds (default: the whole
    width x height frame). Corners overlap the strips."""
    if width < 1 or height < 1:
        raise ValueError("region masks need a non-empty frame")
    bx, by, bw, bh = bounds if bounds is not None else (0, 0, width, height)
    if bw < 1 or bh < 1 or bx < 0 or by < 0 or bx + bw > width or by + bh > height:
        raise ValueError(f"bounds {bounds} do not fit a {width}x{height} frame")

    strip = min(_side(edge_fraction, bw, bh), bw, bh)
    corner = min(_side(corner_fraction, bw, bh), bw, bh)
    x1, y1 = bx + bw, by + bh

    def region(rows: slice, cols: slice) -> BinaryMask:
        bits = np.zeros((height, width), dtype=bool)
        bits[rows, cols] = True
        return BinaryMask(bits=bits)

    return RegionMasks(
        edges={
            "top": region(slice(by, by + strip), slice(bx, x1)),
            "bottom": region(slice(y1 - strip, y1), slice(bx, x1)),
            "left": region(slice(by, y1), slice(bx, bx + strip)),
            "right": region(slice(by, y1), slice(x1 - strip, x1)),
        },
        corners={
            "top_left": region(slice(by, by + corner), slice(bx, bx + corner)),
            "top_right": region(slice(by, by + corner), slice(x1 - corner, x1)),
            "bottom_left": region(slice(y1 - corner, y1), slice(bx, bx + corner)),
            "bottom_right": region(slice(y1 - corner, y1), slice(x1 - corner, x1)),
        },
    )
