from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

MIN_DETERMINANT = 1e-8


class Keypoint(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x: float
    y: float
    scale: float
    orientation: float  # radians
    descriptor: np.ndarray

    @field_validator("descriptor")
    @classmethod
    def _check_descriptor(cls, descriptor: np.ndarray) -> np.ndarray:
        descriptor = np.asarray(descriptor, dtype=np.float32).ravel().copy()
        if not np.linalg.norm(descriptor) > 0:
            raise ValueError("descriptor must have a positive L2 norm")
        descriptor.setflags(write=False)
        return descriptor


class Correspondence(BaseModel):
    """A matched pair: src in the damaged image, dst in the reference."""

    model_config = ConfigDict(frozen=True)

    src: Tuple[float, float]
    dst: Tuple[float, float]
    distance: float = 0.0


class Homography(BaseModel):
    """3x3 projective transform, row-major, scaled so the bottom-right entry is 1."""

    model_config = ConfigDict(frozen=True)

    values: Tuple[float, float, float, float, float, float, float, float, float]

    @model_validator(mode="before")
    @classmethod
    def _from_matrix(cls, data):
        if isinstance(data, np.ndarray):
            data = {"values": data}
        if isinstance(data, dict) and isinstance(data.get("values"), np.ndarray):
            data = {**data, "values": tuple(float(v) for v in data["values"].ravel())}
        return data

    @model_validator(mode="after")
    def _normalize(self) -> "Homography":
        m = np.array(self.values, dtype=np.float64).reshape(3, 3)
        if not np.all(np.isfinite(m)) or abs(m[2, 2]) < 1e-12:
            raise ValueError("homography must be finite with a nonzero bottom-right entry")
        m = m / m[2, 2]
        if abs(np.linalg.det(m)) <= MIN_DETERMINANT:
            raise ValueError("homography is not invertible")
        object.__setattr__(self, "values", tuple(float(v) for v in m.ravel()))
        return self

    @classmethod
    def identity(cls) -> "Homography":
        return cls(values=(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64).reshape(3, 3)

    def inverse(self) -> "Homography":
        return Homography(values=np.linalg.inv(self.matrix))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map an (N, 2) array of points."""
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        projected = np.c_[pts, np.ones(len(pts))] @ self.matrix.T
        return projected[:, :2] / projected[:, 2:3]


class HomographyEstimate(BaseModel):
    homography: Homography
    inliers: List[bool]

    @property
    def inlier_count(self) -> int:
        return sum(self.inliers)


class AlignConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    ratio_test: float = 0.75
    ransac_reproj_threshold: float = 3.0
    ransac_max_iters: int = 2000
    ransac_confidence: float = 0.999
    min_matches: int = 4
    min_inliers: int = 10
    max_keypoints: int = 4000  # 0 keeps every detection
    seed: int = 0  # mixed into the data-derived RANSAC seed
    working_side: int = 1024  # longest side keypoints are detected at; 0 keeps full size

    @model_validator(mode="after")
    def _ranges(self) -> "AlignConfig":
        if not 0 < self.ratio_test < 1:
            raise ValueError("ratio_test must be within (0, 1)")
        if self.ransac_reproj_threshold <= 0 or self.ransac_max_iters <= 0:
            raise ValueError("RANSAC threshold and iteration budget must be > 0")
        if not 0 < self.ransac_confidence < 1:
            raise ValueError("ransac_confidence must be within (0, 1)")
        if self.min_matches < 4 or self.min_inliers < 4:
            raise ValueError("a homography needs at least 4 matches and 4 inliers")
        if self.max_keypoints < 0 or self.seed < 0:
            raise ValueError("max_keypoints and seed must be >= 0")
        if self.working_side != 0 and self.working_side < 64:
            raise ValueError("working_side must be 0 or >= 64")
        return self
