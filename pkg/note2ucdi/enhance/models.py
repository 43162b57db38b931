from typing import Tuple

from pydantic import BaseModel, ConfigDict, field_validator, model_validator


class EnhanceConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    median_enabled: bool = True
    median_kernel: int = 3
    sharpen_enabled: bool = True
    stretch_enabled: bool = True
    stretch_low_pct: float = 2.0
    stretch_high_pct: float = 98.0
    clahe_enabled: bool = True
    clahe_clip: float = 2.0
    clahe_tiles: Tuple[int, int] = (8, 8)  # (rows, cols)
    bilateral_diameter: int = 9
    bilateral_sigma_color: float = 75.0
    bilateral_sigma_space: float = 75.0

    @field_validator("median_kernel")
    @classmethod
    def _odd_kernel(cls, k: int) -> int:
        if k < 3 or k % 2 == 0:
            raise ValueError(f"median_kernel must be odd and >= 3, got {k}")
        return k

    @field_validator("clahe_clip")
    @classmethod
    def _positive_clip(cls, clip: float) -> float:
        if clip <= 0:
            raise ValueError("clahe_clip must be > 0")
        return clip

    @field_validator("clahe_tiles")
    @classmethod
    def _tiles(cls, tiles: Tuple[int, int]) -> Tuple[int, int]:
        if tiles[0] < 1 or tiles[1] < 1:
            raise ValueError("clahe_tiles must be at least 1x1")
        return tiles

    @field_validator("bilateral_diameter")
    @classmethod
    def _diameter(cls, d: int) -> int:
        if d < 1:
            raise ValueError("bilateral_diameter must be >= 1")
        return d

    @model_validator(mode="after")
    def _stretch_range(self) -> "EnhanceConfig":
        if not 0 <= self.stretch_low_pct < self.stretch_high_pct <= 100:
            raise ValueError("need 0 <= stretch_low_pct < stretch_high_pct <= 100")
        if self.bilateral_sigma_color <= 0 or self.bilateral_sigma_space <= 0:
            raise ValueError("bilateral sigmas must be > 0")
        return self

    def disabled(self) -> "EnhanceConfig":
        """Same parameters with every pipeline stage switched off."""
        return self.model_copy(
            update={
                "median_enabled": False,
                "sharpen_enabled": False,
                "stretch_enabled": False,
                "clahe_enabled": False,
            }
        )
