from typing import Dict, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator


EdgeName = Literal["top", "bottom", "left", "right"]
CornerName = Literal["top_left", "top_right", "bottom_left", "bottom_right"]

EDGE_NAMES: Tuple[EdgeName, ...] = ("top", "bottom", "left", "right")
CORNER_NAMES: Tuple[CornerName, ...] = (
    "top_left",
    "top_right",
    "bottom_left",
    "bottom_right",
)


def _frozen_copy(array: np.ndarray) -> np.ndarray:
    frozen = np.ascontiguousarray(array).copy()
    frozen.setflags(write=False)
    return frozen


class RasterImage(BaseModel):
    """8-bit raster, row-major. Grayscale is stored as (H, W), colour as (H, W, 3)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    pixels: np.ndarray

    @field_validator("pixels")
    @classmethod
    def _check_pixels(cls, pixels: np.ndarray) -> np.ndarray:
        if not isinstance(pixels, np.ndarray):
            raise ValueError("pixels must be a numpy array")
        if pixels.dtype != np.uint8:
            raise ValueError(f"pixels must be uint8, got {pixels.dtype}")
        if pixels.ndim == 3 and pixels.shape[2] == 1:
            pixels = pixels[:, :, 0]
        if pixels.ndim not in (2, 3) or (pixels.ndim == 3 and pixels.shape[2] != 3):
            raise ValueError(f"unsupported raster shape {pixels.shape}")
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise ValueError("raster must be at least 1x1")
        return _frozen_copy(pixels)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3

    @property
    def size(self) -> Tuple[int, int]:
        return self.width, self.height

    @property
    def data(self) -> bytes:
        return self.pixels.tobytes()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RasterImage):
            return NotImplemented
        return bool(np.array_equal(self.pixels, other.pixels))


class BinaryMask(BaseModel):
    """Per-pixel indicator aligned to a RasterImage."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    bits: np.ndarray

    @field_validator("bits")
    @classmethod
    def _check_bits(cls, bits: np.ndarray) -> np.ndarray:
        if not isinstance(bits, np.ndarray):
            raise ValueError("bits must be a numpy array")
        if bits.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {bits.shape}")
        if bits.shape[0] < 1 or bits.shape[1] < 1:
            raise ValueError("mask must be at least 1x1")
        return _frozen_copy(bits.astype(bool, copy=False))

    @classmethod
    def empty(cls, width: int, height: int) -> "BinaryMask":
        return cls(bits=np.zeros((height, width), dtype=bool))

    @classmethod
    def full(cls, width: int, height: int) -> "BinaryMask":
        return cls(bits=np.ones((height, width), dtype=bool))

    @property
    def width(self) -> int:
        return int(self.bits.shape[1])

    @property
    def height(self) -> int:
        return int(self.bits.shape[0])

    @property
    def area(self) -> int:
        return int(np.count_nonzero(self.bits))

    def to_uint8(self) -> np.ndarray:
        return self.bits.astype(np.uint8) * 255

    def matches(self, image: RasterImage) -> bool:
        return self.width == image.width and self.height == image.height

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return bool(np.array_equal(self.bits, other.bits))


class RegionMasks(BaseModel):
    """Border strips and corner squares of a note, in reference coordinates."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    edges: Dict[EdgeName, BinaryMask]
    corners: Dict[CornerName, BinaryMask]

    @model_validator(mode="after")
    def _check_regions(self) -> "RegionMasks":
        if set(self.edges) != set(EDGE_NAMES):
            raise ValueError(f"edges must be exactly {EDGE_NAMES}")
        if set(self.corners) != set(CORNER_NAMES):
            raise ValueError(f"corners must be exactly {CORNER_NAMES}")
        shapes = {m.bits.shape for m in [*self.edges.values(), *self.corners.values()]}
        if len(shapes) != 1:
            raise ValueError("all region masks must share one size")
        for name, mask in [*self.edges.items(), *self.corners.items()]:
            if mask.area == 0:
                raise ValueError(f"region {name} is empty")
        return self

    @property
    def width(self) -> int:
        return self.edges["top"].width

    @property
    def height(self) -> int:
        return self.edges["top"].height


class Component(BaseModel):
    """One 8-connected piece of a mask; the mask is cropped to the bounding box."""

    model_config = ConfigDict(frozen=True)

    label: int
    area: int
    bbox: Tuple[int, int, int, int]  # x, y, width, height
    mask: BinaryMask

    def full_mask(self, width: int, height: int) -> BinaryMask:
        x, y, w, h = self.bbox
        bits = np.zeros((height, width), dtype=bool)
        bits[y : y + h, x : x + w] = self.mask.bits
        return BinaryMask(bits=bits)
