import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Dict, Iterator, List, Optional

from pydantic import BaseModel, ConfigDict

from note2ucdi.align.homography import estimate_homography, warp_mask, warp_to_reference
from note2ucdi.align.keypoints import detect_keypoints, match_descriptors
from note2ucdi.align.models import Keypoint
from note2ucdi.damage.background import remove_background
from note2ucdi.damage.features import extract_feature_clusters, match_feature_clusters
from note2ucdi.damage.metrics import (
    binary_damage,
    count_damage_regions,
    damage_regions,
    region_area_floor,
    rgb_damage,
    structural_overlap,
)
from note2ucdi.damage.models import (
    AnalysisConfig,
    DamageArtifacts,
    DamageReport,
    FeatureCluster,
)
from note2ucdi.exceptions import (
    AlignmentError,
    ImageFormatError,
    Note2UCDIException,
    StageError,
)
from note2ucdi.imgcore.models import BinaryMask, RasterImage, RegionMasks
from note2ucdi.imgcore.regions import build_region_masks, mask_bounds
from note2ucdi.ucdi.index import explain_ucdi

logger = logging.getLogger(__name__)


def create_note2ucdi(config: Optional[AnalysisConfig] = None) -> "Note2UCDI":
    return Note2UCDI(config or AnalysisConfig())


class ReferenceTemplate(BaseModel):
    """Everything derived from a clean reference note, reusable across analyses."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    image: RasterImage
    masked: RasterImage
    mask: BinaryMask
    keypoints: List[Keypoint]
    clusters: List[FeatureCluster]
    regions: RegionMasks


class _StageTimer:
    def __init__(self) -> None:
        self.timings_ms: Dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        except StageError:
            raise
        except Note2UCDIException as e:
            raise StageError(name, e) from e
        finally:
            self.timings_ms[name] = round((time.perf_counter() - start) * 1000.0, 3)


class Note2UCDI:
    _config: AnalysisConfig

    def __init__(self, config: AnalysisConfig) -> None:
        # RunConfig carries extra sections; keep only the analysis ones
        self._config = AnalysisConfig(
            **{name: getattr(config, name) for name in AnalysisConfig.model_fields}
        )

    @property
    def config(self) -> AnalysisConfig:
        return self._config

    def prepare_reference(self, ref: RasterImage) -> ReferenceTemplate:
        """Background removal, keypoints, feature clusters and region masks of a reference."""
        cfg = self._config
        timer = _StageTimer()
        with timer.stage("reference"):
            masked, mask = remove_background(ref, cfg.background)
            keypoints = detect_keypoints(masked, cfg.align)
            clusters = extract_feature_clusters(masked, mask, cfg.damage)
            regions = build_region_masks(
                ref.width,
                ref.height,
                cfg.damage.edge_strip_fraction,
                cfg.damage.corner_square_fraction,
                bounds=mask_bounds(mask),
            )
        return ReferenceTemplate(
            image=ref,
            masked=masked,
            mask=mask,
            keypoints=keypoints,
            clusters=clusters,
            regions=regions,
        )

    def _timed_reference(self, ref: RasterImage, timer: _StageTimer) -> ReferenceTemplate:
        with timer.stage("reference"):
            return self.prepare_reference(ref)

    def analyze(
        self, ref: RasterImage | ReferenceTemplate, damaged: RasterImage
    ) -> DamageReport:
        """Full damage analysis of a damaged note against its clean reference.

        An alignment failure yields a report with status "unalignable"; any
        other failing stage raises StageError naming the stage.
        """
        cfg = self._config
        timer = _StageTimer()

        if isinstance(ref, RasterImage):
            if ref.channels != 3 or damaged.channels != 3:
                raise StageError("background", ImageFormatError("analysis needs RGB images"))
            with ThreadPoolExecutor(max_workers=2) as executor:
                template_future = executor.submit(self._timed_reference, ref, timer)
                with timer.stage("background"):
                    dmg_masked, dmg_mask = remove_background(damaged, cfg.background)
                template = template_future.result()
        else:
            template = ref
            with timer.stage("background"):
                dmg_masked, dmg_mask = remove_background(damaged, cfg.background)

        start = time.perf_counter()
        try:
            dmg_keypoints = detect_keypoints(dmg_masked, cfg.align)
            matches = match_descriptors(dmg_keypoints, template.keypoints, cfg.align)
            estimate = estimate_homography(matches, cfg.align)
        except (AlignmentError, ImageFormatError) as e:
            timer.timings_ms["align"] = round((time.perf_counter() - start) * 1000.0, 3)
            logger.info("note could not be aligned: %s", e)
            return DamageReport(
                status="unalignable",
                failure_reason=str(e),
                timings_ms=timer.timings_ms,
            )
        timer.timings_ms["align"] = round((time.perf_counter() - start) * 1000.0, 3)

        ref_size = template.image.size
        with timer.stage("warp"):
            warped = warp_to_reference(dmg_masked, estimate.homography, ref_size)
            warped_mask = warp_mask(dmg_mask, estimate.homography, ref_size)

        with timer.stage("binary_damage"):
            binary_pct, damage_mask = binary_damage(template.mask, warped_mask)

        with timer.stage("rgb_damage"):
            valid = BinaryMask(bits=template.mask.bits & warped_mask.bits)
            rgb_pct, heatmap = rgb_damage(template.masked, warped, valid, cfg.enhance)

        with timer.stage("structural_overlap"):
            structure = structural_overlap(
                damage_mask, template.regions, cfg.damage.overlap_threshold
            )

        with timer.stage("features"):
            cluster_matches, missing = match_feature_clusters(
                template.clusters, warped, cfg.damage
            )

        with timer.stage("regions"):
            z = count_damage_regions(damage_mask, template.mask.area, cfg.damage)
            top = damage_regions(
                damage_mask,
                region_area_floor(template.mask.area, cfg.damage),
                cfg.damage.top_regions,
            )

        report = DamageReport(
            binary_damage=binary_pct,
            rgb_damage=rgb_pct,
            damaged_edges=structure.damaged_edges,
            damaged_corners=structure.damaged_corners,
            missing_features=missing,
            total_features=len(template.clusters),
            damaged_regions=z,
            overlaps=structure.overlaps,
            cluster_matches=cluster_matches,
            top_regions=top,
            homography=estimate.homography,
            match_count=len(matches),
            inlier_count=estimate.inlier_count,
        )

        with timer.stage("ucdi"):
            breakdown = explain_ucdi(report.ucdi_inputs(), cfg.ucdi)

        report = report.model_copy(
            update={
                "ucdi": breakdown.score,
                "ucdi_breakdown": breakdown,
                "timings_ms": timer.timings_ms,
                "artifacts": DamageArtifacts(
                    reference=template.masked,
                    warped=warped,
                    reference_mask=template.mask,
                    warped_mask=warped_mask,
                    damage_mask=damage_mask,
                    heatmap=heatmap,
                ),
            }
        )
        logger.info(
            "analysis: B=%.2f R=%.2f E=%d C=%d F=%d/%d Z=%d ucdi=%.4f",
            binary_pct,
            rgb_pct,
            structure.damaged_edges,
            structure.damaged_corners,
            missing,
            len(template.clusters),
            z,
            breakdown.score,
        )
        return report


def analyze(
    ref: RasterImage, damaged: RasterImage, config: Optional[AnalysisConfig] = None
) -> DamageReport:
    return create_note2ucdi(config).analyze(ref, damaged)
