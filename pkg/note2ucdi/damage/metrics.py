import math
from typing import List, Optional, Tuple

import numpy as np
from scipy import ndimage

from note2ucdi.damage.models import DamageConfig, DamageRegion, StructuralOverlap
from note2ucdi.enhance.models import EnhanceConfig
from note2ucdi.enhance.pipeline import prepare_for_comparison
from note2ucdi.exceptions import DamageError
from note2ucdi.imgcore.models import BinaryMask, RasterImage, RegionMasks
from note2ucdi.imgcore.morphology import connected_components, label_components

ZONE_ROWS = ("Top", "Middle", "Bottom")
ZONE_COLS = ("Left", "Center", "Right")


def binary_damage(ref_mask: BinaryMask, dmg_mask: BinaryMask) -> Tuple[float, BinaryMask]:
    """Percentage of reference foreground missing from the aligned damaged note.

    Pixels present only in the damaged mask never count as negative damage.
    """
    if ref_mask.bits.shape != dmg_mask.bits.shape:
        raise DamageError(
            f"mask sizes differ: {ref_mask.bits.shape} vs {dmg_mask.bits.shape}"
        )
    if ref_mask.area == 0:
        raise DamageError("empty reference mask")

    damage = BinaryMask(bits=ref_mask.bits & ~dmg_mask.bits)
    return 100.0 * damage.area / ref_mask.area, damage


def rgb_damage(
    ref: RasterImage,
    warped: RasterImage,
    mask: BinaryMask,
    enhance_cfg: Optional[EnhanceConfig] = None,
) -> Tuple[float, np.ndarray]:
    """Mean absolute chromatic deviation over the mask, as a percentage of 255.

    With an EnhanceConfig both images first go through CLAHE and bilateral
    smoothing; without one they are compared as given. Returns the percentage
    and the per-pixel mean-over-channels absolute difference.
    """
    if ref.size != warped.size or mask.width != ref.width or mask.height != ref.height:
        raise DamageError("reference, warped image and mask must share one size")
    valid = mask.area
    if valid == 0:
        raise DamageError("empty comparison mask")

    if enhance_cfg is not None:
        ref = prepare_for_comparison(ref, enhance_cfg)
        warped = prepare_for_comparison(warped, enhance_cfg)

    a = np.atleast_3d(ref.pixels).astype(np.float64)
    b = np.atleast_3d(warped.pixels).astype(np.float64)
    heatmap = np.abs(b - a).mean(axis=2)
    percent = 100.0 * heatmap[mask.bits].sum() / (255.0 * valid)
    return float(min(100.0, percent)), heatmap


def structural_overlap(
    damage_mask: BinaryMask, regions: RegionMasks, overlap_threshold: float
) -> StructuralOverlap:
    """Fraction of every edge strip and corner square covered by damage.

    A region counts as damaged only when its overlap is strictly above the threshold.
    """
    overlaps = {}
    damaged = {"edges": 0, "corners": 0}
    for kind, group in (("edges", regions.edges), ("corners", regions.corners)):
        for name, region in group.items():
            covered = np.count_nonzero(damage_mask.bits & region.bits)
            overlap = covered / region.area
            overlaps[name] = overlap
            if overlap > overlap_threshold:
                damaged[kind] += 1

    return StructuralOverlap(
        overlaps=overlaps,
        damaged_edges=damaged["edges"],
        damaged_corners=damaged["corners"],
    )


def region_area_floor(ref_area: int, config: DamageConfig) -> int:
    return math.ceil(config.region_min_area_fraction * ref_area)


def count_damage_regions(
    damage_mask: BinaryMask, ref_area: int, config: Optional[DamageConfig] = None
) -> int:
    """Number of 8-connected damage components at least
    region_min_area_fraction * ref_area pixels large."""
    config = config or DamageConfig()
    return connected_components(damage_mask, region_area_floor(ref_area, config))[1]


def _zone(x: float, y: float, width: int, height: int) -> str:
    row = min(2, int(3 * y / height))
    col = min(2, int(3 * x / width))
    return f"{ZONE_ROWS[row]} {ZONE_COLS[col]}"


def damage_regions(
    damage_mask: BinaryMask, min_area: int, top_k: int
) -> List[DamageRegion]:
    """The top_k largest damage components, largest first."""
    labels, count = label_components(damage_mask)
    if count == 0 or top_k == 0:
        return []

    areas = np.bincount(labels.ravel(), minlength=count + 1)
    kept = [label for label in range(1, count + 1) if areas[label] >= max(1, min_area)]
    kept.sort(key=lambda label: (-areas[label], label))
    kept = kept[:top_k]

    centroids = ndimage.center_of_mass(damage_mask.bits, labels, kept)
    slices = ndimage.find_objects(labels)
    regions = []
    for label, (cy, cx) in zip(kept, centroids):
        rows, cols = slices[label - 1]
        regions.append(
            DamageRegion(
                area=int(areas[label]),
                centroid=(float(cx), float(cy)),
                bbox=(cols.start, rows.start, cols.stop - cols.start, rows.stop - rows.start),
                zone=_zone(cx, cy, damage_mask.width, damage_mask.height),
            )
        )
    return regions
