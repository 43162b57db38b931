from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from note2ucdi.align.models import AlignConfig, Homography
from note2ucdi.enhance.models import EnhanceConfig
from note2ucdi.imgcore.models import BinaryMask, RasterImage
from note2ucdi.ucdi.models import UcdiBreakdown, UcdiConfig, UcdiInputs

BBox = Tuple[int, int, int, int]  # x, y, width, height


class BackgroundConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    saturation_threshold: int = Field(default=30, ge=0, le=255)
    morph_radius: int = Field(default=2, ge=0)


class DamageConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    dbscan_eps: float = 0.02  # fraction of the reference diagonal
    dbscan_min_samples: int = Field(default=3, ge=1)
    ncc_missing_threshold: float = 0.5
    ncc_search_margin_fraction: float = Field(default=0.10, ge=0)
    overlap_threshold: float = 0.1
    edge_strip_fraction: float = 0.05
    corner_square_fraction: float = 0.10
    region_min_area_fraction: float = 0.0005
    adaptive_block_size: int = 15
    adaptive_offset: float = 10.0
    max_contour_points: int = Field(default=5000, ge=1)
    template_padding: int = Field(default=4, ge=0)
    top_regions: int = Field(default=5, ge=0)
    match_working_side: int = Field(default=1024, ge=0)  # NCC frame cap; 0 keeps full size
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _ranges(self) -> "DamageConfig":
        for name in ("ncc_missing_threshold", "overlap_threshold"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must be within (0, 1)")
        for name in (
            "dbscan_eps",
            "edge_strip_fraction",
            "corner_square_fraction",
            "region_min_area_fraction",
        ):
            if not 0 < getattr(self, name) < 0.5:
                raise ValueError(f"{name} must be within (0, 0.5)")
        if self.adaptive_block_size < 3 or self.adaptive_block_size % 2 == 0:
            raise ValueError("adaptive_block_size must be odd and >= 3")
        return self


class FeatureCluster(BaseModel):
    """A DBSCAN group of salient reference contour points and its template patch."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    id: int
    points: np.ndarray  # (K, 2) integer x, y
    bbox: BBox
    template: RasterImage
    template_origin: Tuple[int, int]  # x, y of the template's top-left pixel

    @property
    def size(self) -> int:
        return int(self.points.shape[0])


class ClusterMatch(BaseModel):
    cluster_id: int
    score: float = Field(ge=-1.0, le=1.0)
    location: Tuple[int, int]  # best template placement, top-left x, y
    bbox: BBox
    missing: bool


class StructuralOverlap(BaseModel):
    overlaps: Dict[str, float]
    damaged_edges: int = Field(ge=0, le=4)
    damaged_corners: int = Field(ge=0, le=4)


class DamageRegion(BaseModel):
    area: int
    centroid: Tuple[float, float]  # x, y
    bbox: BBox
    zone: str


class DamageArtifacts(BaseModel):
    """Intermediate images of one analysis, kept in memory for overlays."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    reference: RasterImage
    warped: RasterImage
    reference_mask: BinaryMask
    warped_mask: BinaryMask
    damage_mask: BinaryMask
    heatmap: np.ndarray  # per-pixel mean absolute difference, float


class DamageReport(BaseModel):
    status: Literal["ok", "unalignable"] = "ok"
    failure_reason: Optional[str] = None

    binary_damage: Optional[float] = Field(default=None, ge=0, le=100)
    rgb_damage: Optional[float] = Field(default=None, ge=0, le=100)
    damaged_edges: Optional[int] = Field(default=None, ge=0, le=4)
    damaged_corners: Optional[int] = Field(default=None, ge=0, le=4)
    missing_features: Optional[int] = Field(default=None, ge=0)
    total_features: Optional[int] = Field(default=None, ge=0)
    damaged_regions: Optional[int] = Field(default=None, ge=0)

    overlaps: Dict[str, float] = {}
    cluster_matches: List[ClusterMatch] = []
    top_regions: List[DamageRegion] = []
    homography: Optional[Homography] = None
    match_count: Optional[int] = None
    inlier_count: Optional[int] = None

    ucdi: Optional[float] = Field(default=None, ge=0, le=1)
    ucdi_breakdown: Optional[UcdiBreakdown] = None

    timings_ms: Dict[str, float] = Field(default={}, exclude=True)
    artifacts: Optional[DamageArtifacts] = Field(default=None, exclude=True)

    @model_validator(mode="after")
    def _features_within_total(self) -> "DamageReport":
        if self.missing_features is not None and self.total_features is not None:
            if self.missing_features > self.total_features:
                raise ValueError("missing_features cannot exceed total_features")
        return self

    def ucdi_inputs(self) -> UcdiInputs:
        return UcdiInputs(
            binary_damage=self.binary_damage,
            rgb_damage=self.rgb_damage,
            damaged_edges=self.damaged_edges,
            damaged_corners=self.damaged_corners,
            missing_features=self.missing_features,
            total_features=self.total_features,
            damaged_regions=self.damaged_regions,
        )


class AnalysisConfig(BaseModel):
    """Every knob of one reference-versus-damaged analysis."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    enhance: EnhanceConfig = EnhanceConfig()
    align: AlignConfig = AlignConfig()
    background: BackgroundConfig = BackgroundConfig()
    damage: DamageConfig = DamageConfig()
    ucdi: UcdiConfig = UcdiConfig()
