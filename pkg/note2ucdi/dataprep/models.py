from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, PrivateAttr, field_validator, model_validator

SplitName = Literal["train", "val", "test"]
DedupStatus = Literal["retained", "duplicate-of", "skipped"]

HASH_BITS = 64

# popcount of every byte value
_POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


class DedupConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    threshold: int = 5
    hash_bits: int = HASH_BITS
    workers: int = 1

    @model_validator(mode="after")
    def _threshold_range(self) -> "DedupConfig":
        if self.hash_bits != HASH_BITS:
            raise ValueError("only 64-bit perceptual hashes are supported")
        if not 0 <= self.threshold <= self.hash_bits:
            raise ValueError(f"threshold must be within [0, {self.hash_bits}]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        return self


class DedupIndex(BaseModel):
    """Per-class hash dictionary: 64-bit hash -> identifier of the retained image."""

    classes: Dict[str, Dict[int, str]] = {}

    _packed: Dict[str, np.ndarray] = PrivateAttr(default_factory=dict)

    def _hashes(self, label: str) -> np.ndarray:
        stored = self.classes.get(label, {})
        packed = self._packed.get(label)
        if packed is None or packed.size != len(stored):
            packed = np.fromiter(stored.keys(), dtype=np.uint64, count=len(stored))
            self._packed[label] = packed
        return packed

    def find_similar(self, label: str, h: int, threshold: int) -> Optional[str]:
        """First stored image of the class whose hash is within threshold bits (inclusive)."""
        hashes = self._hashes(label)
        if hashes.size == 0:
            return None
        xor = np.bitwise_xor(hashes, np.uint64(h))
        distances = _POPCOUNT8[xor.view(np.uint8)].reshape(-1, 8).sum(axis=1)
        close = np.flatnonzero(distances <= threshold)
        if close.size == 0:
            return None
        return self.classes[label][int(hashes[close[0]])]

    def add(self, label: str, h: int, image_id: str) -> None:
        self.classes.setdefault(label, {})[h] = image_id
        packed = self._packed.get(label)
        if packed is not None:
            self._packed[label] = np.append(packed, np.uint64(h))

    def __len__(self) -> int:
        return sum(len(v) for v in self.classes.values())


class DedupEntry(BaseModel):
    path: str
    label: str
    source: str = ""
    hash: Optional[int] = None
    status: DedupStatus = "retained"
    duplicate_of: Optional[str] = None
    failure_reason: Optional[str] = None
    split: Optional[SplitName] = None

    @property
    def hash_hex(self) -> Optional[str]:
        return None if self.hash is None else f"{self.hash:016x}"


class DedupResult(BaseModel):
    index: DedupIndex
    entries: List[DedupEntry]

    @property
    def retained(self) -> List[DedupEntry]:
        return [e for e in self.entries if e.status == "retained"]

    @property
    def skipped(self) -> List[DedupEntry]:
        return [e for e in self.entries if e.status == "skipped"]


class SplitManifest(BaseModel):
    assignments: Dict[str, SplitName]
    ratios: Tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0
    counts: Dict[str, Dict[SplitName, int]] = {}
    warnings: List[str] = []

    @field_validator("ratios")
    @classmethod
    def _ratios_sum(cls, ratios: Tuple[float, float, float]) -> Tuple[float, float, float]:
        if any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
            raise ValueError("split ratios must be non-negative and sum to 1")
        return ratios


class AugmentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    crop_scale: Tuple[float, float] = (0.8, 1.0)
    # aspect-ratio jitter relative to the input's own aspect ratio
    crop_ratio: Tuple[float, float] = (3 / 4, 4 / 3)
    rotation_degrees: float = 15.0
    hflip_prob: float = 0.5
    brightness: float = 0.2
    contrast: float = 0.2
    saturation: float = 0.2
    hue: float = 0.1
    translate: float = 0.1
    affine_scale: Tuple[float, float] = (0.9, 1.1)
    shear_degrees: float = 10.0
    erase_prob: float = 0.5
    erase_area: Tuple[float, float] = (0.02, 0.15)
    erase_ratio: Tuple[float, float] = (0.3, 3.3)
    erase_value: int = 0
    fill_value: int = 0
    output_size: int = 224
    seed: int = 0

    @model_validator(mode="after")
    def _ranges(self) -> "AugmentConfig":
        for name in ("crop_scale", "crop_ratio", "affine_scale", "erase_area", "erase_ratio"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ValueError(f"{name} must satisfy 0 < low <= high")
        if self.crop_scale[1] > 1 or self.erase_area[1] > 1:
            raise ValueError("crop_scale and erase_area are fractions of the image")
        for name in ("hflip_prob", "erase_prob", "translate"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must be within [0, 1]")
        for name in ("brightness", "contrast", "saturation"):
            if not 0 <= getattr(self, name) < 1:
                raise ValueError(f"{name} must be within [0, 1)")
        if not 0 <= self.hue <= 0.5:
            raise ValueError("hue must be within [0, 0.5]")
        if self.rotation_degrees < 0 or self.shear_degrees < 0:
            raise ValueError("rotation and shear bounds must be >= 0")
        if self.output_size < 1:
            raise ValueError("output_size must be >= 1")
        return self

    @classmethod
    def identity(cls, output_size: int = 224) -> "AugmentConfig":
        """Every stage collapsed to a no-op; only the final resize remains."""
        return cls(
            crop_scale=(1.0, 1.0),
            crop_ratio=(1.0, 1.0),
            rotation_degrees=0.0,
            hflip_prob=0.0,
            brightness=0.0,
            contrast=0.0,
            saturation=0.0,
            hue=0.0,
            translate=0.0,
            affine_scale=(1.0, 1.0),
            shear_degrees=0.0,
            erase_prob=0.0,
            output_size=output_size,
        )
